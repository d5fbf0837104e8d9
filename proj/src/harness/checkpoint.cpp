#include "crl/harness/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "crl/harness/config.hpp"

namespace crl {

namespace {

constexpr char kMagic[8] = {'C', 'R', 'L', 'C', 'K', 'P', 'T', '\0'};

enum Tag : std::uint8_t { tag_matrix = 1, tag_u64 = 2, tag_string = 3 };

template <class T>
void append(std::string& out, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        out.append(reinterpret_cast<const char*>(b), sizeof(T));
    } else {
        out.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
}

class Cursor {
public:
    Cursor(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

    template <class T>
    T take() {
        need(sizeof(T));
        T v;
        unsigned char b[sizeof(T)];
        std::memcpy(b, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string take_string(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (n > end_ - pos_) throw CheckpointError("checkpoint truncated");
    }
    const std::string& bytes_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::put(const std::string& name, const Matrix& m) {
    if (has(name)) throw std::invalid_argument("checkpoint entry '" + name + "' already present");
    entries_.emplace_back(name, m);
}

void Checkpoint::put(const std::string& name, std::uint64_t v) {
    if (has(name)) throw std::invalid_argument("checkpoint entry '" + name + "' already present");
    entries_.emplace_back(name, v);
}

void Checkpoint::put(const std::string& name, const std::string& s) {
    if (has(name)) throw std::invalid_argument("checkpoint entry '" + name + "' already present");
    entries_.emplace_back(name, s);
}

bool Checkpoint::has(const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return true;
    return false;
}

const Checkpoint::Value& Checkpoint::find(const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return v;
    throw CheckpointError("checkpoint has no entry '" + name + "'");
}

const Matrix& Checkpoint::matrix(const std::string& name) const {
    const auto* m = std::get_if<Matrix>(&find(name));
    if (!m) throw CheckpointError("checkpoint entry '" + name + "' is not an array");
    return *m;
}

std::uint64_t Checkpoint::u64(const std::string& name) const {
    const auto* v = std::get_if<std::uint64_t>(&find(name));
    if (!v) throw CheckpointError("checkpoint entry '" + name + "' is not an integer");
    return *v;
}

double Checkpoint::f64(const std::string& name) const {
    const Matrix& m = matrix(name);
    if (m.size() != 1) throw CheckpointError("checkpoint entry '" + name + "' is not a scalar");
    return m(0, 0);
}

const std::string& Checkpoint::str(const std::string& name) const {
    const auto* s = std::get_if<std::string>(&find(name));
    if (!s) throw CheckpointError("checkpoint entry '" + name + "' is not a string");
    return *s;
}

std::string Checkpoint::serialize() const {
    std::string out(kMagic, sizeof kMagic);
    append<std::uint32_t>(out, kVersion);
    append<std::uint64_t>(out, config_hash);
    append<std::uint64_t>(out, entries_.size());
    for (const auto& [name, value] : entries_) {
        append<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        if (const auto* m = std::get_if<Matrix>(&value)) {
            append<std::uint8_t>(out, tag_matrix);
            append<std::uint64_t>(out, static_cast<std::uint64_t>(m->rows()));
            append<std::uint64_t>(out, static_cast<std::uint64_t>(m->cols()));
            for (Eigen::Index r = 0; r < m->rows(); ++r)
                for (Eigen::Index c = 0; c < m->cols(); ++c) append<double>(out, (*m)(r, c));
        } else if (const auto* u = std::get_if<std::uint64_t>(&value)) {
            append<std::uint8_t>(out, tag_u64);
            append<std::uint64_t>(out, *u);
        } else {
            const auto& s = std::get<std::string>(value);
            append<std::uint8_t>(out, tag_string);
            append<std::uint64_t>(out, s.size());
            out += s;
        }
    }
    append<std::uint64_t>(out, fnv1a64(out.data(), out.size()));
    return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
    if (bytes.size() < sizeof kMagic + 4 + 8 + 8 + 8) throw CheckpointError("checkpoint truncated");
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError("not a checkpoint file");
    const std::size_t body = bytes.size() - 8;
    {
        Cursor c(bytes, bytes.size());
        c.take_string(body);
        if (c.take<std::uint64_t>() != fnv1a64(bytes.data(), body))
            throw CheckpointError("checkpoint integrity check failed");
    }
    Cursor c(bytes, body);
    c.take_string(sizeof kMagic);
    const auto version = c.take<std::uint32_t>();
    if (version != kVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ck;
    ck.config_hash = c.take<std::uint64_t>();
    const auto count = c.take<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = c.take<std::uint32_t>();
        std::string name = c.take_string(len);
        const auto tag = c.take<std::uint8_t>();
        if (tag == tag_matrix) {
            const auto rows = c.take<std::uint64_t>();
            const auto cols = c.take<std::uint64_t>();
            if (cols != 0 && rows > (body - c.pos()) / 8 / cols) throw CheckpointError("checkpoint truncated");
            Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index col = 0; col < m.cols(); ++col) m(r, col) = c.take<double>();
            ck.entries_.emplace_back(std::move(name), std::move(m));
        } else if (tag == tag_u64) {
            ck.entries_.emplace_back(std::move(name), c.take<std::uint64_t>());
        } else if (tag == tag_string) {
            const auto n = c.take<std::uint64_t>();
            ck.entries_.emplace_back(std::move(name), c.take_string(n));
        } else {
            throw CheckpointError("checkpoint entry '" + name + "' has unknown type tag");
        }
    }
    if (c.pos() != body) throw CheckpointError("checkpoint has trailing bytes");
    return ck;
}

void Checkpoint::save(const std::string& path) const {
    const std::string bytes = serialize();
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw CheckpointError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("cannot move checkpoint into '" + path + "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace crl
