#pragma once

#include <stdexcept>
#include <string>

namespace stcp {

// Error taxonomy shared by the library and the CLI exit-code contract:
// input problems exit 1, numeric failures exit 2, configuration exit 3.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* kind() const noexcept = 0;
    virtual int exit_code() const noexcept = 0;
};

class input_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "input"; }
    int exit_code() const noexcept override { return 1; }
};

// Data violates a structural requirement of the spatial domain
// (duplicate station coordinates, ids and the like).
class domain_violation : public input_error {
public:
    using input_error::input_error;
    const char* kind() const noexcept override { return "domain-violation"; }
};

class numeric_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "numeric"; }
    int exit_code() const noexcept override { return 2; }
};

// Parameter value outside its admissible open domain.
class param_domain_error : public numeric_error {
public:
    using numeric_error::numeric_error;
    const char* kind() const noexcept override { return "domain"; }
};

// Every optimizer restart failed to produce a finite objective.
class fit_error : public numeric_error {
public:
    using numeric_error::numeric_error;
    const char* kind() const noexcept override { return "fit"; }
};

// A matrix required to be invertible or positive definite is not.
class conditioning_error : public numeric_error {
public:
    using numeric_error::numeric_error;
    const char* kind() const noexcept override { return "conditioning"; }
};

class config_error : public error {
public:
    using error::error;
    const char* kind() const noexcept override { return "config"; }
    int exit_code() const noexcept override { return 3; }
};

// A configured work budget would be exceeded; the caller may fall back.
class budget_error : public config_error {
public:
    using config_error::config_error;
    const char* kind() const noexcept override { return "budget"; }
};

} // namespace stcp
