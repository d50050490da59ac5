#pragma once

#include <stdexcept>
#include <string>

namespace tooltree {

/// Base for every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DuplicateName : public Error {
public:
    explicit DuplicateName(const std::string& name) : Error("duplicate tool name: " + name) {}
};

class InvalidCard : public Error {
public:
    using Error::Error;
};

class NotAdmissible : public Error {
public:
    using Error::Error;
};

class MalformedVerdict : public Error {
public:
    using Error::Error;
};

class EvaluatorUnavailable : public Error {
public:
    using Error::Error;
};

class TreeExhausted : public Error {
public:
    TreeExhausted() : Error("search tree exhausted") {}
    using Error::Error;
};

class EmptyTree : public Error {
public:
    EmptyTree() : Error("no rollout completed") {}
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class SuiteParseError : public Error {
public:
    using Error::Error;
};

class InsufficientPoints : public Error {
public:
    InsufficientPoints() : Error("efficiency needs at least two points") {}
};

class IoFailure : public Error {
public:
    using Error::Error;
};

} // namespace tooltree
