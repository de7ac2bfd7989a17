#pragma once

#include <stdexcept>
#include <string>

namespace casc {

// Error categories surfaced by the CLI as "[category] message".
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* category() const noexcept { return "error"; }
};

class io_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "io"; }
};

// Recognized file but wrong structure (bad magic, bad version, bad schema).
class format_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "format"; }
};

// File structure ok but content truncated or internally impossible.
class corruption_error : public format_error {
public:
    using format_error::format_error;
    const char* category() const noexcept override { return "corruption"; }
};

// Input data violates a documented contract (consistency errors included).
class data_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "data"; }
};

// Caller supplied an invalid parameter or violated a precondition.
class param_error : public error {
public:
    using error::error;
    const char* category() const noexcept override { return "param"; }
};

class bounds_error : public param_error {
public:
    using param_error::param_error;
    const char* category() const noexcept override { return "bounds"; }
};

} // namespace casc
