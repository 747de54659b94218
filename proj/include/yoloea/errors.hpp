#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace yoloea {

/// Base class for every data-level failure raised by the library.
/// The CLI maps these to exit code 2.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Enclosing box of a pair has (numerically) zero area.
class DegenerateEnclosureError : public Error
{
public:
    using Error::Error;
};

/// A box with zero area where a positive area is required.
class DegenerateBoxError : public Error
{
public:
    using Error::Error;
};

/// Tensor or kernel dimensions that do not fit together.
class ShapeError : public Error
{
public:
    using Error::Error;
};

/// Evaluation over a dataset with no ground truth at all.
class EmptyDatasetError : public Error
{
public:
    using Error::Error;
};

/// Malformed line in a label/prediction/manifest file.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, std::string reason)
        : Error("line " + std::to_string(line) + ": " + reason)
        , line_(line)
        , reason_(std::move(reason))
    {
    }

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

} // namespace yoloea
