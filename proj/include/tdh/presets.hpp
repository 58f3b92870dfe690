#pragma once

#include <string>
#include <vector>

#include "tdh/circuit.hpp"

namespace tdh::presets {

// Named board presets (board1..board5).  Component values are tuned so the
// simulated fundamentals and levels approximate the reference measurements;
// they are working calibrations, not physical truth.
circuit::OscillatorCircuit board(const std::string& name);

std::vector<std::string> board_names();

}  // namespace tdh::presets
