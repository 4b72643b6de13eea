#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace foldkit {

/// Base class for every error foldkit throws.  Geometric *verdicts* (a form
/// failing to be folded, a template failing validation) are returned as
/// structured reports instead; exceptions are reserved for malformed input
/// and for evaluation outside an expression's domain.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed expression text.  `offset` is the byte offset of the first
/// character that could not be consumed.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

class UnknownFunctionError : public Error {
public:
    explicit UnknownFunctionError(const std::string& name)
        : Error("unknown function '" + name + "'") {}
};

class UnknownVariableError : public Error {
public:
    explicit UnknownVariableError(const std::string& name)
        : Error("unknown variable '" + name + "'") {}
};

/// Evaluation left the domain of a subexpression (sqrt of a negative,
/// division by zero, log of a non-positive value).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

class ZeroVectorError : public Error {
public:
    ZeroVectorError() : Error("zero vector has no primitive direction") {}
};

class RankDeficientError : public Error {
public:
    explicit RankDeficientError(const std::string& what) : Error(what) {}
};

class NotUnimodularError : public Error {
public:
    explicit NotUnimodularError(const std::string& what) : Error(what) {}
};

class InvalidComplexError : public Error {
public:
    explicit InvalidComplexError(const std::string& what) : Error(what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

}  // namespace foldkit
