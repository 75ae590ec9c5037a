#pragma once

#include <stdexcept>
#include <string>

namespace radar {

// invalid-argument conditions reuse std::invalid_argument directly.

class GenerationError : public std::runtime_error {
public:
    explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

class ExternalServiceError : public std::runtime_error {
public:
    explicit ExternalServiceError(const std::string& what) : std::runtime_error(what) {}
};

class NotFoundError : public std::runtime_error {
public:
    explicit NotFoundError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigurationError : public std::runtime_error {
public:
    explicit ConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class TrainingDivergence : public std::runtime_error {
public:
    explicit TrainingDivergence(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace radar
