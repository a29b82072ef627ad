#pragma once

#include <string>

#include <json.hpp>

#include "jcpulse/types.hpp"

namespace jcpulse {

// All emitted JSON uses insertion-ordered objects so that equal inputs give
// byte-identical reports.
using jrep = nlohmann::ordered_json;

jrep mat_to_json(const Mat& m);          // row-major, entries as [re, im]
Mat mat_from_json(const jrep& j);

jrep pulse_to_json(const ControlPulse& p);
ControlPulse pulse_from_json(const jrep& j);

jrep pulses_to_json(const std::vector<ControlPulse>& seq);
std::vector<ControlPulse> pulses_from_json(const jrep& j);

std::string render_report(const jrep& j);  // dump(2) + trailing newline

}  // namespace jcpulse
