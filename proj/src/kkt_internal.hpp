#pragma once

#include <memory>

#include "plateopt/kkt.hpp"

namespace plateopt::detail {

std::unique_ptr<KktSystem> make_rt0_system(const ProblemSpec& spec, MeshPtr mesh, int split_depth);
std::unique_ptr<KktSystem> make_p1_system(const ProblemSpec& spec, MeshPtr mesh, int split_depth);

}  // namespace plateopt::detail
