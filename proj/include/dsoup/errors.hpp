#pragma once

#include <stdexcept>
#include <string>

namespace dsoup {

// Error taxonomy maps one-to-one onto CLI exit codes:
//   ValidationError (and subclasses) -> 1
//   NumericalError  (and subclasses) -> 2
//   IoError         (and subclasses) -> 3
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// soup() across incompatible network shapes
class ArchMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// soup() across checkpoints finetuned from different pretrains
class AncestorMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotFoundError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// kl_grid called on a grid that misses too much probability mass
class CoverageError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class TrainingError : public NumericalError {
public:
    TrainingError(const std::string& msg, long step)
        : NumericalError(msg + " (step " + std::to_string(step) + ")"), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

class SamplingError : public NumericalError {
public:
    SamplingError(const std::string& msg, long step)
        : NumericalError(msg + " (step " + std::to_string(step) + ")"), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public IoError {
public:
    using IoError::IoError;
};

class IntegrityError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace dsoup
