#ifndef CGP_ERROR_HPP
#define CGP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cgp {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent user configuration (CLI exit code 2).
struct config_error : error {
    explicit config_error(const std::string& msg) : error("config: " + msg) {}
};

// Numerical failure: SVD non-convergence, divergence, degenerate prototype.
struct numeric_error : error {
    explicit numeric_error(const std::string& msg) : error("numeric: " + msg) {}
};

// File format / IO problems. `kind` lets callers tell the cases apart.
struct io_error : error {
    enum class kind { open_failed, bad_magic, truncated, count_mismatch, corrupt };
    kind what_kind;
    io_error(kind k, const std::string& msg) : error("io: " + msg), what_kind(k) {}
};

// A caller violated a documented precondition.
struct contract_error : error {
    explicit contract_error(const std::string& msg) : error("contract: " + msg) {}
};

}  // namespace cgp

#endif
