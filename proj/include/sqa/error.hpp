#pragma once

#include <stdexcept>
#include <string>

namespace sqa {

// Base for every error the toolkit raises on bad input.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input could not be parsed (bad JSON, missing field, wrong type).
class ParseError : public Error {
public:
    using Error::Error;
};

// Input parsed but violates a data-model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace sqa
