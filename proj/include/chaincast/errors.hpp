#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chaincast {

// Error taxonomy mirrors the CLI exit-code contract:
//   Input    -> exit 2 (malformed files, bad parameters)
//   Model    -> exit 3 (data/model infeasibility: zero-volume days,
//               disconnected supergraphs, divergent solves)
//   Internal -> exit 4 (contract violations, should-not-happen)
enum class ErrorKind { Input, Model, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class IngestError : public Error {
public:
    explicit IngestError(std::string msg, long line = -1)
        : Error(ErrorKind::Input, line >= 0 ? "line " + std::to_string(line) + ": " + msg
                                            : std::move(msg)),
          line_(line) {}

    [[nodiscard]] long line() const noexcept { return line_; }

private:
    long line_;
};

class ParamError : public Error {
public:
    explicit ParamError(std::string msg) : Error(ErrorKind::Input, std::move(msg)) {}
};

class AlignmentError : public Error {
public:
    explicit AlignmentError(std::string msg) : Error(ErrorKind::Input, std::move(msg)) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(std::string msg) : Error(ErrorKind::Input, std::move(msg)) {}
};

class ZeroVolumeDayError : public Error {
public:
    explicit ZeroVolumeDayError(std::string date_str)
        : Error(ErrorKind::Model, "zero transaction volume on " + date_str),
          date_str_(std::move(date_str)) {}

    [[nodiscard]] const std::string& date_str() const noexcept { return date_str_; }

private:
    std::string date_str_;
};

class DisconnectedSupergraphError : public Error {
public:
    DisconnectedSupergraphError(std::string msg, std::vector<std::vector<int>> components)
        : Error(ErrorKind::Model, std::move(msg)), components_(std::move(components)) {}

    [[nodiscard]] const std::vector<std::vector<int>>& components() const noexcept {
        return components_;
    }

private:
    std::vector<std::vector<int>> components_;
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(double t)
        : Error(ErrorKind::Model, "solution diverged at t = " + std::to_string(t)), t_(t) {}

    [[nodiscard]] double time() const noexcept { return t_; }

private:
    double t_;
};

class InternalError : public Error {
public:
    explicit InternalError(std::string msg) : Error(ErrorKind::Internal, std::move(msg)) {}
};

}  // namespace chaincast
