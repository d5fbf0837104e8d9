#include "crl/replay/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace crl {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'L', 'D'};

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    template <class T>
    void put(T v) {
        v = to_little(v);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_rows(const Matrix& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(m(r, c));
    }
    void raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
    void finish(const std::string& path) {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed for '" + path + "'");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    template <class T>
    T get() {
        T v;
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw std::runtime_error("'" + path_ + "': truncated dataset file");
        return to_little(v);
    }
    Matrix get_rows(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get<double>();
        return m;
    }
    void raw(char* data, std::size_t n) {
        in_.read(data, static_cast<std::streamsize>(n));
        if (!in_) throw std::runtime_error("'" + path_ + "': truncated dataset file");
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::ifstream in_;
    std::string path_;
};

}  // namespace

std::int64_t Dataset::num_transitions() const {
    std::int64_t n = 0;
    for (const auto& t : trajectories) n += t.num_transitions();
    return n;
}

std::string dataset_sidecar_path(const std::string& path) { return path + ".json"; }

void save_dataset(const std::string& path, const Dataset& dataset) {
    for (const auto& t : dataset.trajectories) {
        t.validate();
        require_cols(t.states, dataset.observation_dim, "save_dataset states");
        require_cols(t.actions, dataset.stored_action_dim, "save_dataset actions");
        if (t.commanded_goal.size() != dataset.goal_dim) throw ShapeError("save_dataset: commanded goal size");
    }
    Writer w(path);
    w.raw(kMagic, 4);
    w.put<std::uint32_t>(kDatasetVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.observation_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.stored_action_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.goal_dim));
    w.put<std::uint64_t>(dataset.trajectories.size());
    for (const auto& t : dataset.trajectories) w.put<std::uint64_t>(static_cast<std::uint64_t>(t.length()));
    for (const auto& t : dataset.trajectories) {
        w.put_rows(t.states);
        w.put_rows(t.actions);
        w.put_rows(t.commanded_goal.transpose());
    }
    w.finish(path);

    std::ofstream side(dataset_sidecar_path(path));
    if (!side) throw std::runtime_error("cannot write sidecar for '" + path + "'");
    nlohmann::json meta = dataset.sidecar.is_null() ? nlohmann::json::object() : dataset.sidecar;
    meta["format_version"] = kDatasetVersion;
    meta["observation_dim"] = dataset.observation_dim;
    meta["stored_action_dim"] = dataset.stored_action_dim;
    meta["goal_dim"] = dataset.goal_dim;
    meta["num_trajectories"] = dataset.trajectories.size();
    meta["num_transitions"] = dataset.num_transitions();
    side << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("'" + path + "' is not a dataset file");
    const auto version = r.get<std::uint32_t>();
    if (version != kDatasetVersion)
        throw std::runtime_error("'" + path + "': unsupported dataset version " + std::to_string(version));
    Dataset d;
    d.observation_dim = static_cast<int>(r.get<std::uint32_t>());
    d.stored_action_dim = static_cast<int>(r.get<std::uint32_t>());
    d.goal_dim = static_cast<int>(r.get<std::uint32_t>());
    if (d.observation_dim < 1 || d.stored_action_dim < 1 || d.goal_dim < 1 || d.goal_dim > d.observation_dim)
        throw std::runtime_error("'" + path + "': invalid dimensions in header");
    const auto count = r.get<std::uint64_t>();
    std::vector<std::uint64_t> lengths(count);
    for (auto& len : lengths) {
        len = r.get<std::uint64_t>();
        if (len < 2 || len > (1ULL << 32)) throw std::runtime_error("'" + path + "': invalid trajectory length");
    }
    d.trajectories.reserve(count);
    for (const auto len : lengths) {
        Trajectory t;
        const auto n = static_cast<Eigen::Index>(len);
        t.states = r.get_rows(n, d.observation_dim);
        t.actions = r.get_rows(n - 1, d.stored_action_dim);
        t.commanded_goal = r.get_rows(1, d.goal_dim).row(0).transpose();
        try {
            t.validate();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("'" + path + "': " + e.what());
        }
        d.trajectories.push_back(std::move(t));
    }
    if (!r.at_end()) throw std::runtime_error("'" + path + "': trailing bytes after dataset body");

    std::ifstream side(dataset_sidecar_path(path));
    if (side) {
        try {
            d.sidecar = nlohmann::json::parse(side);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("'" + dataset_sidecar_path(path) + "': " + e.what());
        }
        if (d.sidecar.value("observation_dim", d.observation_dim) != d.observation_dim ||
            d.sidecar.value("goal_dim", d.goal_dim) != d.goal_dim)
            throw std::runtime_error("'" + path + "': sidecar dimensions disagree with binary header");
    }
    return d;
}

void fill_buffer(TrajectoryBuffer& buffer, const Dataset& dataset) {
    for (const auto& t : dataset.trajectories) buffer.insert(t);
}

}  // namespace crl
