#pragma once

// Simulation scenarios. Parameters follow one recipe: A, B and C have
// i.i.d. standard normal entries, U = Q Lambda Q^T and V likewise with Q a
// random orthogonal matrix and Lambda the absolute values of i.i.d. standard
// normals. The A matrices of each component are then rescaled by a common
// factor so that rho(Phi_k) hits the scenario's target radius, and the model
// is normalized.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmar/model.hpp"
#include "mmar/rng.hpp"

namespace mmar {

struct ScenarioSpec {
  std::string name;
  MmarSpec spec;
  std::vector<double> alphas;
  std::vector<double> radii;  // target rho(Phi_k)
  std::uint64_t seed = 0;
};

std::vector<std::string> scenario_names();
ScenarioSpec scenario_spec(const std::string& name);

MmarModel generate_scenario(const ScenarioSpec& s);
MmarModel generate_scenario(const std::string& name, std::uint64_t seed);

// Directory of the frozen scenario files shipped with the sources.
std::filesystem::path scenario_dir();
MmarModel load_scenario(const std::string& name);

// Random orthogonal matrix (QR of a Gaussian matrix, with the sign of R's
// diagonal moved into Q).
Matrix random_orthogonal(Index n, Rng& rng);

}  // namespace mmar
