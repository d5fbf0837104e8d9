#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crl/numcore/types.hpp"

namespace crl {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ordered collection of named entries (f64 matrices, u64 scalars, strings)
/// serialized as:
///   char[8] "CRLCKPT\0", u32 version, u64 config hash, u64 entry count,
///   entries (u32 name length, name, u8 tag, payload), u64 FNV-1a of all
///   preceding bytes.
/// Entry order is preserved, so save -> load -> save is byte-identical.
class Checkpoint {
public:
    static constexpr std::uint32_t kVersion = 1;

    using Value = std::variant<Matrix, std::uint64_t, std::string>;

    std::uint64_t config_hash = 0;

    void put(const std::string& name, const Matrix& m);
    void put(const std::string& name, std::uint64_t v);
    void put(const std::string& name, const std::string& s);
    void put_i64(const std::string& name, std::int64_t v) { put(name, static_cast<std::uint64_t>(v)); }
    void put_f64(const std::string& name, double v) { put(name, Matrix::Constant(1, 1, v)); }

    bool has(const std::string& name) const;
    const Matrix& matrix(const std::string& name) const;
    std::uint64_t u64(const std::string& name) const;
    std::int64_t i64(const std::string& name) const { return static_cast<std::int64_t>(u64(name)); }
    double f64(const std::string& name) const;
    const std::string& str(const std::string& name) const;

    const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

    std::string serialize() const;
    static Checkpoint deserialize(const std::string& bytes);

    /// Throws CheckpointError on I/O failure.
    void save(const std::string& path) const;
    /// Throws CheckpointError on bad magic, version, truncation or checksum.
    static Checkpoint load(const std::string& path);

private:
    const Value& find(const std::string& name) const;
    std::vector<std::pair<std::string, Value>> entries_;
};

}  // namespace crl
