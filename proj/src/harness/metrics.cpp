#include "crl/harness/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace crl {

std::string MetricsRecord::to_json() const {
    nlohmann::ordered_json j;
    j["wall_step"] = wall_step;
    j["env_steps"] = env_steps;
    j["name"] = name;
    if (std::isfinite(value)) j["value"] = value;
    else j["value"] = nullptr;
    j["seed"] = seed;
    return j.dump();
}

MetricsRecord MetricsRecord::from_json(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    MetricsRecord r;
    r.wall_step = j.at("wall_step").get<std::int64_t>();
    r.env_steps = j.at("env_steps").get<std::int64_t>();
    r.name = j.at("name").get<std::string>();
    r.value = j.at("value").is_null() ? std::nan("") : j.at("value").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

MetricsWriter::MetricsWriter(const std::string& path, std::int64_t keep_records) {
    std::string kept;
    if (keep_records > 0) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot reopen metrics file '" + path + "'");
        std::string line;
        while (count_ < keep_records && std::getline(in, line)) {
            kept += line + "\n";
            ++count_;
        }
        if (count_ != keep_records) throw std::runtime_error("metrics file '" + path + "' is shorter than the checkpoint");
    }
    out_.open(path, std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open metrics file '" + path + "'");
    out_ << kept;
    out_.flush();
}

void MetricsWriter::write(const MetricsRecord& record) {
    out_ << record.to_json() << "\n";
    out_.flush();
    ++count_;
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read metrics file '" + path + "'");
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(MetricsRecord::from_json(line));
    return out;
}

}  // namespace crl
