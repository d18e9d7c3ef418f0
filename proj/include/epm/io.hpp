#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "epm/model.hpp"
#include "epm/moments.hpp"
#include "epm/nhh.hpp"
#include "epm/oracle.hpp"
#include "epm/spectral.hpp"

namespace epm {

using Json = nlohmann::ordered_json;

/// `%.12e`, the fixed float format of all CSV output.
std::string format_fixed(double v);

Json to_json(const ValidationReport& rep);

/// {basis: [labels], matrix: [[re, im], ...] row-major}
Json to_json(const EvolutionMatrix& m);
EvolutionMatrix evolution_from_json(const Json& j);

Json to_json(const EPReport& rep);
EPReport ep_report_from_json(const Json& j);

Json to_json(const LatticeModel& lat);
LatticeModel lattice_from_json(const Json& j);
std::string lattice_summary(const LatticeModel& lat);
std::string lattice_graphml(const LatticeModel& lat);

Json to_json(const VerificationReport& rep);

std::string sweep_csv(const SweepTable& table);
SweepTable parse_sweep_csv(std::string_view text);

std::string trajectory_csv(const MomentSamples& samples);
MomentSamples parse_trajectory_csv(std::string_view text);

}  // namespace epm
