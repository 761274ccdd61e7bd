#pragma once

#include <stdexcept>
#include <string>

namespace dbmatch {

// Raised when an input (spec, config, argument) violates a documented
// precondition or invariant. Construction-time, never sampling-time.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for filesystem problems (open/read/write failures). The message
// always carries the offending path.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a pair file is structurally unusable. The kind distinguishes
// the failure classes callers may want to handle separately.
struct PairFormatError : std::runtime_error {
    enum class Kind { bad_magic, version_mismatch, truncated, checksum_mismatch, bad_payload };

    PairFormatError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}

    Kind kind;
};

}  // namespace dbmatch
