#include "tdh/presets.hpp"

#include "tdh/errors.hpp"

namespace tdh::presets {

namespace {

using circuit::OscillatorCircuit;
using diode::DiodeParams;

// All five boards share the same nominal design; the per-board spread lives
// in the assembly parasitics (lead inductance, coupling) and small diode
// variations, which is what drives the distinct signatures.

OscillatorCircuit board1() {
    OscillatorCircuit c;
    c.diode = DiodeParams{};
    c.diode.junction_capacitance = 4.2e-12;
    c.diode.capacitance_voltage_coeff = 1.2;
    c.lead_inductance = 7.6e-9;
    c.dc_block_capacitance = 2.4e-12;
    c.series_resistance = 0.35;
    return c;
}

OscillatorCircuit board2() {
    OscillatorCircuit c;
    c.diode = DiodeParams{};
    c.diode.junction_capacitance = 3.4e-12;
    c.diode.capacitance_voltage_coeff = 0.3;
    c.diode.peak_current = 2.95e-3;
    c.lead_inductance = 3.55e-9;
    c.dc_block_capacitance = 1.0e-12;
    c.series_resistance = 0.3;
    return c;
}

OscillatorCircuit board3() {
    OscillatorCircuit c;
    c.diode = DiodeParams{};
    c.diode.junction_capacitance = 4.6e-12;
    c.diode.capacitance_voltage_coeff = 0.02;
    c.diode.valley_current = 1.41e-3;
    c.lead_inductance = 10.2e-9;
    c.dc_block_capacitance = 1.47e-12;
    c.series_resistance = 0.5;
    return c;
}

OscillatorCircuit board4() {
    OscillatorCircuit c;
    c.diode = DiodeParams{};
    c.diode.junction_capacitance = 9.0e-12;
    c.diode.capacitance_voltage_coeff = 0.5;
    c.diode.peak_current = 2.9e-3;
    c.lead_inductance = 14.6e-9;
    c.dc_block_capacitance = 2.76e-12;
    c.series_resistance = 0.4;
    return c;
}

// Board 5 carries its bias feed's wiring in the choke path (a few meters of
// supply cable dwarfs the on-board choke).  The resulting underdamped bias
// ring is what makes this board self-block into bursts near its oscillation
// onset instead of starting cleanly.
OscillatorCircuit board5() {
    OscillatorCircuit c;
    c.diode = DiodeParams{};
    c.diode.junction_capacitance = 16e-12;
    c.diode.capacitance_voltage_coeff = 0.7;
    c.lead_inductance = 27.5e-9;
    c.dc_block_capacitance = 5.1e-12;
    c.series_resistance = 2.0;
    c.choke_inductance = 10e-6;
    c.smoothing_capacitance = 10e-9;
    return c;
}

}  // namespace

circuit::OscillatorCircuit board(const std::string& name) {
    if (name == "board1") return board1();
    if (name == "board2") return board2();
    if (name == "board3") return board3();
    if (name == "board4") return board4();
    if (name == "board5") return board5();
    throw InvalidInput("unknown board preset: " + name);
}

std::vector<std::string> board_names() {
    return {"board1", "board2", "board3", "board4", "board5"};
}

}  // namespace tdh::presets
