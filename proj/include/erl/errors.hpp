#ifndef ERL_ERRORS_HPP
#define ERL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace erl {

// Base for everything thrown by the toolkit. The CLI maps subclasses to
// exit codes (config=2, data=3, model=4).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct ModelError : Error {
    using Error::Error;
};

struct InvalidCoordinate : DataError {
    using DataError::DataError;
};

struct DegenerateLabels : ModelError {
    using ModelError::ModelError;
};

struct DimensionMismatch : ModelError {
    using ModelError::ModelError;
};

struct EmptyEvaluation : DataError {
    using DataError::DataError;
};

struct UndefinedAuc : DataError {
    using DataError::DataError;
};

struct ExplainerUnsupported : ModelError {
    using ModelError::ModelError;
};

struct UndefinedImportance : DataError {
    using DataError::DataError;
};

struct InvalidBatching : ConfigError {
    using ConfigError::ConfigError;
};

struct GenerationFailed : DataError {
    using DataError::DataError;
};

} // namespace erl

#endif
