#include "radar/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "radar/errors.hpp"

namespace radar::contrastive {

SclMode scl_mode_from_string(const std::string& s) {
    if (s == "on") return SclMode::On;
    if (s == "off") return SclMode::Off;
    if (s == "no-affected") return SclMode::NoAffected;
    if (s == "affected-as-orig") return SclMode::AffectedAsOrig;
    throw ConfigurationError("unknown scl mode: " + s);
}

std::string to_string(SclMode mode) {
    switch (mode) {
        case SclMode::On: return "on";
        case SclMode::Off: return "off";
        case SclMode::NoAffected: return "no-affected";
        case SclMode::AffectedAsOrig: return "affected-as-orig";
    }
    throw ConfigurationError("invalid scl mode value");
}

ProjectionHead::ProjectionHead(const ProjectionParams& p, std::uint64_t seed) : params(p) {
    if (params.input_dim <= 0 || params.embed_dim <= 0)
        throw ConfigurationError("projection dimensions must be positive");
    Rng rng = make_rng(seed, "projection");
    mlp.init(params.input_dim, params.hidden_width(), params.embed_dim, rng);
}

Matrix ProjectionHead::forward(const Matrix& x, Cache* cache,
                               const nn::DropoutCtx& dropout) const {
    if (x.cols() != params.input_dim)
        throw std::invalid_argument("projection input width mismatch");
    Cache local;
    Cache& c = cache ? *cache : local;
    Matrix z = mlp.forward(x, &c.mlp, dropout);
    if (params.l2_normalise) {
        c.inv_norm.resize(z.rows());
        for (Index i = 0; i < z.rows(); ++i) {
            const Scalar n = z.row(i).norm();
            if (n == 0.0)
                throw std::invalid_argument("cannot L2-normalise a zero embedding row");
            c.inv_norm(i) = 1.0 / n;
            z.row(i) *= c.inv_norm(i);
        }
    }
    c.z = z;
    return z;
}

Matrix ProjectionHead::backward(Cache& cache, const Matrix& dz) {
    Matrix draw = dz;
    if (params.l2_normalise) {
        for (Index i = 0; i < dz.rows(); ++i) {
            const Scalar dot = cache.z.row(i).dot(dz.row(i));
            draw.row(i) = (dz.row(i) - cache.z.row(i) * dot) * cache.inv_norm(i);
        }
    }
    return mlp.backward(cache.mlp, draw);
}

void ProjectionHead::zero_grad() { mlp.zero_grad(); }

void ProjectionHead::visit_params(const nn::ParamVisitor& f) { mlp.visit_params(f); }

std::vector<int> LabeledEmbeddings::label_ids() const {
    std::vector<int> ids(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) ids[i] = static_cast<int>(labels[i]);
    return ids;
}

void LabeledEmbeddings::append(const Matrix& z, const std::vector<PatchClass>& patch_labels,
                               Index group, Index image) {
    if (z.rows() != static_cast<Index>(patch_labels.size()))
        throw std::invalid_argument("embedding rows and labels disagree");
    const Index old = embeddings.rows();
    if (old == 0) {
        embeddings = z;
    } else {
        if (embeddings.cols() != z.cols())
            throw std::invalid_argument("embedding width changed between appends");
        embeddings.conservativeResize(old + z.rows(), Eigen::NoChange);
        embeddings.bottomRows(z.rows()) = z;
    }
    for (Index p = 0; p < z.rows(); ++p) {
        labels.push_back(patch_labels[static_cast<std::size_t>(p)]);
        sources.push_back({group, image, p});
    }
}

LabeledEmbeddings assemble_embeddings(const LabeledEmbeddings& all, SclMode mode, Index m_cap,
                                      Rng& rng) {
    std::vector<Index> keep;
    std::vector<PatchClass> relabelled;
    keep.reserve(static_cast<std::size_t>(all.size()));
    for (Index i = 0; i < all.size(); ++i) {
        PatchClass c = all.labels[static_cast<std::size_t>(i)];
        if (mode == SclMode::NoAffected && c == PatchClass::Affected) continue;
        if (mode == SclMode::AffectedAsOrig && c == PatchClass::Affected)
            c = PatchClass::Original;
        keep.push_back(i);
        relabelled.push_back(c);
    }

    if (m_cap > 0) {
        std::vector<Index> capped;
        std::vector<PatchClass> capped_labels;
        for (PatchClass c :
             {PatchClass::Original, PatchClass::Tampered, PatchClass::Affected}) {
            std::vector<std::size_t> members;
            for (std::size_t k = 0; k < keep.size(); ++k)
                if (relabelled[k] == c) members.push_back(k);
            if (static_cast<Index>(members.size()) > m_cap) {
                std::vector<std::size_t> chosen;
                std::sample(members.begin(), members.end(), std::back_inserter(chosen),
                            static_cast<std::size_t>(m_cap), rng);
                members = std::move(chosen);
            }
            for (std::size_t k : members) {
                capped.push_back(keep[k]);
                capped_labels.push_back(relabelled[k]);
            }
        }
        keep = std::move(capped);
        relabelled = std::move(capped_labels);
    }

    LabeledEmbeddings out;
    out.embeddings.resize(static_cast<Index>(keep.size()), all.embeddings.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.embeddings.row(static_cast<Index>(k)) = all.embeddings.row(keep[k]);
        out.labels.push_back(relabelled[k]);
        out.sources.push_back(all.sources[static_cast<std::size_t>(keep[k])]);
    }
    return out;
}

namespace {

void check_supcon_args(const Matrix& z, const std::vector<int>& labels, Scalar tau) {
    if (z.rows() < 2) throw std::invalid_argument("supcon loss needs at least two embeddings");
    if (static_cast<Index>(labels.size()) != z.rows())
        throw std::invalid_argument("supcon labels and embeddings disagree");
    if (!(tau > 0)) throw std::invalid_argument("temperature must be positive");
}

}  // namespace

Scalar supcon_loss(const Matrix& z, const std::vector<int>& labels, Scalar tau) {
    check_supcon_args(z, labels, tau);
    const Index m = z.rows();
    const Matrix s = (z * z.transpose()) / tau;

    Scalar loss = 0;
    for (Index i = 0; i < m; ++i) {
        Index positives = 0;
        for (Index j = 0; j < m; ++j)
            if (j != i && labels[static_cast<std::size_t>(j)] ==
                              labels[static_cast<std::size_t>(i)])
                ++positives;
        if (positives == 0) continue;

        Scalar row_max = -std::numeric_limits<Scalar>::infinity();
        for (Index k = 0; k < m; ++k)
            if (k != i) row_max = std::max(row_max, s(i, k));
        Scalar denom = 0;
        for (Index k = 0; k < m; ++k)
            if (k != i) denom += std::exp(s(i, k) - row_max);
        const Scalar lse = row_max + std::log(denom);

        Scalar anchor = 0;
        for (Index j = 0; j < m; ++j)
            if (j != i && labels[static_cast<std::size_t>(j)] ==
                              labels[static_cast<std::size_t>(i)])
                anchor += s(i, j) - lse;
        loss += -anchor / static_cast<Scalar>(positives);
    }
    return loss;
}

Scalar supcon_loss_backward(const Matrix& z, const std::vector<int>& labels, Scalar tau,
                            Matrix& dz) {
    check_supcon_args(z, labels, tau);
    const Index m = z.rows();
    const Matrix s = (z * z.transpose()) / tau;

    Matrix g = Matrix::Zero(m, m);
    Scalar loss = 0;
    for (Index i = 0; i < m; ++i) {
        Index positives = 0;
        for (Index j = 0; j < m; ++j)
            if (j != i && labels[static_cast<std::size_t>(j)] ==
                              labels[static_cast<std::size_t>(i)])
                ++positives;
        if (positives == 0) continue;

        Scalar row_max = -std::numeric_limits<Scalar>::infinity();
        for (Index k = 0; k < m; ++k)
            if (k != i) row_max = std::max(row_max, s(i, k));
        Scalar denom = 0;
        for (Index k = 0; k < m; ++k)
            if (k != i) denom += std::exp(s(i, k) - row_max);
        const Scalar lse = row_max + std::log(denom);

        const Scalar inv_pos = 1.0 / static_cast<Scalar>(positives);
        for (Index j = 0; j < m; ++j) {
            if (j == i) continue;
            const Scalar p = std::exp(s(i, j) - lse);
            const bool same = labels[static_cast<std::size_t>(j)] ==
                              labels[static_cast<std::size_t>(i)];
            g(i, j) = (p - (same ? inv_pos : 0.0)) / tau;
            if (same) loss += -(s(i, j) - lse) * inv_pos;
        }
    }
    dz = g * z + g.transpose() * z;
    return loss;
}

}  // namespace radar::contrastive
