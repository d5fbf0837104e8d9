#include "crl/analysis/export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_representation_csv(const std::string& path, const RepresentationTable& table) {
    const auto n = static_cast<Eigen::Index>(table.ids.size());
    if (table.coordinates.rows() != n || table.representations.rows() != n)
        throw ShapeError("write_representation_csv: row counts differ");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "id";
    for (Eigen::Index c = 0; c < table.coordinates.cols(); ++c) out << ",c" << c;
    for (Eigen::Index c = 0; c < table.representations.cols(); ++c) out << ",r" << c;
    out << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        out << table.ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < table.coordinates.cols(); ++c) out << "," << fmt(table.coordinates(i, c));
        for (Eigen::Index c = 0; c < table.representations.cols(); ++c) out << "," << fmt(table.representations(i, c));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

RepresentationTable read_representation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': missing header");
    Eigen::Index n_coord = 0;
    Eigen::Index n_repr = 0;
    {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        if (cell != "id") throw std::runtime_error("'" + path + "': header must start with id");
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty() && cell[0] == 'c' && n_repr == 0) ++n_coord;
            else if (!cell.empty() && cell[0] == 'r') ++n_repr;
            else throw std::runtime_error("'" + path + "': unexpected column '" + cell + "'");
        }
    }
    std::vector<long long> ids;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        ids.push_back(std::stoll(cell));
        Eigen::Index count = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(std::stod(cell));
            ++count;
        }
        if (count != n_coord + n_repr) throw std::runtime_error("'" + path + "': ragged row");
    }
    RepresentationTable t;
    t.ids = ids;
    const auto n = static_cast<Eigen::Index>(ids.size());
    t.coordinates.resize(n, n_coord);
    t.representations.resize(n, n_repr);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < n_coord; ++c) t.coordinates(i, c) = values[k++];
        for (Eigen::Index c = 0; c < n_repr; ++c) t.representations(i, c) = values[k++];
    }
    return t;
}

RepresentationTable sa_representations(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions) {
    RepresentationTable t;
    for (Eigen::Index i = 0; i < states.rows(); ++i) t.ids.push_back(i);
    t.coordinates = hconcat(states, actions);
    t.representations = critic.sa_repr(states, actions);
    return t;
}

RepresentationTable goal_representations(const ContrastiveCritic& critic, const Matrix& goals) {
    RepresentationTable t;
    for (Eigen::Index i = 0; i < goals.rows(); ++i) t.ids.push_back(i);
    t.coordinates = goals;
    t.representations = critic.g_repr(goals);
    return t;
}

}  // namespace crl
