#ifndef DOTMAT_ERRORS_HPP
#define DOTMAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dotmat {

// Base class for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values (bad learning rate, k = 0, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

// A record that could not be parsed; the message carries file/line context.
class ParseError : public DataError {
public:
    using DataError::DataError;
};

// A named column or field is missing from a structured input.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

// A file parsed but its pieces contradict each other (counts, dimensions).
class IntegrityError : public DataError {
public:
    using DataError::DataError;
};

// An id that is not present in the model/dataset it is looked up in.
class LookupError : public Error {
public:
    using Error::Error;
};

// Vector length mismatch in a numeric primitive.
class DimensionError : public Error {
public:
    using Error::Error;
};

// An index or size outside its permitted range.
class BoundsError : public Error {
public:
    using Error::Error;
};

// Input too small or too uniform for the requested statistic.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (unreadable source, unwritable destination).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace dotmat

#endif  // DOTMAT_ERRORS_HPP
