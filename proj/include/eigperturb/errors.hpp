#pragma once

#include <stdexcept>
#include <string>

namespace eigperturb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double pivot) : Error(what), pivot_(pivot) {}
    double pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

// invalid JordanSpec, bad request parameters
class SpecError : public Error {
public:
    using Error::Error;
};

class StructureError : public Error {
public:
    using Error::Error;
};

// W_k (or Psi_k) not invertible to tolerance
class NonGenericError : public Error {
public:
    NonGenericError(const std::string& what, int k, double condition)
        : Error(what), k_(k), condition_(condition) {}
    int k() const noexcept { return k_; }
    double condition() const noexcept { return condition_; }

private:
    int k_;
    double condition_;
};

class ClusterError : public Error {
public:
    ClusterError(const std::string& what, int expected, int found)
        : Error(what), expected_(expected), found_(found) {}
    int expected() const noexcept { return expected_; }
    int found() const noexcept { return found_; }

private:
    int expected_;
    int found_;
};

}  // namespace eigperturb
