#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace levikal {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Physically or structurally invalid input record.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

// Caller violated an API precondition (dimensions, empty input).
class ContractError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class SolverError : public NumericError {
public:
    SolverError(const std::string& what, double last_residual)
        : NumericError(what), last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

class StabilityError : public NumericError {
public:
    StabilityError(const std::string& what, double modulus)
        : NumericError(what), modulus_(modulus) {}
    double modulus() const { return modulus_; }

private:
    double modulus_;
};

class FitError : public NumericError {
public:
    FitError(const std::string& what, std::vector<double> params)
        : NumericError(what), params_(std::move(params)) {}
    const std::vector<double>& final_parameters() const { return params_; }

private:
    std::vector<double> params_;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace levikal
