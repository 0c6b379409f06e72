#pragma once

#include <stdexcept>
#include <string>

namespace agn {

// Base class for every error raised by the library. Each subclass maps to a
// distinct CLI exit status (see harness/cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A distribution or bound request whose parameters admit no solution
// (e.g. an OPT_lin target outside the reachable range).
class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace agn
