#pragma once

#include <string>
#include <vector>

#include "crl/critic/contrastive_critic.hpp"

namespace crl {

/// CSV rows "id,c0,...,c{k-1},r0,...,r{D-1}" written with %.17g so values
/// round-trip exactly.
struct RepresentationTable {
    std::vector<long long> ids;
    Matrix coordinates;
    Matrix representations;
};

void write_representation_csv(const std::string& path, const RepresentationTable& table);
/// Header-only files give an empty table with zero-column matrices unless
/// the header names columns.
RepresentationTable read_representation_csv(const std::string& path);

/// phi(s, a) rows with coordinates [s, a] (stored action form).
RepresentationTable sa_representations(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions);
/// psi(g) rows with coordinates g.
RepresentationTable goal_representations(const ContrastiveCritic& critic, const Matrix& goals);

}  // namespace crl
