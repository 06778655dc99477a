#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace soclearn {

// Base of every error the library raises. `kind()` is the stable machine-readable
// name used in CLI error lines.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class NonStochasticRow : public Error {
public:
    NonStochasticRow(std::size_t row, double sum);
    std::size_t row;
    double sum;
};

class NegativeWeight : public Error {
public:
    NegativeWeight(std::size_t row, std::size_t col, double value);
    std::size_t row;
    std::size_t col;
    double value;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

// Likelihood row of `agent` for state index `state` is not a distribution.
class InvalidLikelihood : public Error {
public:
    InvalidLikelihood(std::size_t agent, std::size_t state, const std::string& reason);
    std::size_t agent;
    std::size_t state;
    std::string reason;
};

class NonStochasticJointRow : public Error {
public:
    NonStochasticJointRow(std::size_t state, double sum);
    std::size_t state;
    double sum;
};

class InvalidBeliefs : public Error {
public:
    InvalidBeliefs(std::size_t agent, const std::string& reason);
    std::size_t agent;
};

// The observed signal had zero forecast probability, so the update is undefined.
class ZeroForecastMass : public Error {
public:
    ZeroForecastMass(std::size_t agent, std::size_t signal, std::size_t step);
    ZeroForecastMass with_step(std::size_t step) const { return {agent, signal, step}; }
    std::size_t agent;
    std::size_t signal;
    std::size_t step;
};

// Renormalization saw a row sum drift larger than the hard limit.
class NormalizationDrift : public Error {
public:
    NormalizationDrift(std::size_t agent, double sum);
};

class NotRevealing : public Error {
public:
    explicit NotRevealing(const std::string& what) : Error("NotRevealing", what) {}
};

class EmptyComparisonSet : public Error {
public:
    explicit EmptyComparisonSet(std::size_t agent);
};

class ParseError : public Error {
public:
    ParseError(std::string location, const std::string& message);
    std::string location;
};

class ValidationError : public Error {
public:
    ValidationError(std::string field, std::string reason);
    std::string field;
    std::string reason;
};

} // namespace soclearn
