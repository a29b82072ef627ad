#include "jcpulse/report.hpp"

#include <stdexcept>

namespace jcpulse {

jrep mat_to_json(const Mat& m) {
  jrep rows = jrep::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    jrep row = jrep::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(jrep::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const jrep& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix JSON must be a 2d array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const jrep& row = j.at(r);
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix JSON rows have uneven length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const jrep& e = row.at(c);
      if (e.is_array() && e.size() == 2)
        m(r, c) = cx(e.at(0).get<double>(), e.at(1).get<double>());
      else if (e.is_number())
        m(r, c) = cx(e.get<double>(), 0.0);
      else
        throw std::invalid_argument("matrix entry must be [re, im] or a number");
    }
  }
  return m;
}

jrep pulse_to_json(const ControlPulse& p) {
  jrep j = jrep::object();
  j["channel"] = p.channel == Channel::carrier ? "carrier" : "red";
  j["theta"] = p.theta;
  j["phi"] = p.phi;
  if (p.restricted())
    j["k"] = *p.restricted_k;
  else
    j["k"] = nullptr;
  return j;
}

ControlPulse pulse_from_json(const jrep& j) {
  ControlPulse p;
  const std::string channel = j.at("channel").get<std::string>();
  if (channel == "carrier")
    p.channel = Channel::carrier;
  else if (channel == "red" || channel == "red_sideband")
    p.channel = Channel::red_sideband;
  else
    throw std::invalid_argument("unknown pulse channel: " + channel);
  p.theta = j.at("theta").get<double>();
  p.phi = j.at("phi").get<double>();
  if (j.contains("k") && !j.at("k").is_null()) p.restricted_k = j.at("k").get<long long>();
  if (p.theta < 0) throw std::invalid_argument("pulse area must be >= 0");
  return p;
}

jrep pulses_to_json(const std::vector<ControlPulse>& seq) {
  jrep arr = jrep::array();
  for (const ControlPulse& p : seq) arr.push_back(pulse_to_json(p));
  return arr;
}

std::vector<ControlPulse> pulses_from_json(const jrep& j) {
  std::vector<ControlPulse> seq;
  for (const jrep& e : j) seq.push_back(pulse_from_json(e));
  return seq;
}

std::string render_report(const jrep& j) { return j.dump(2) + "\n"; }

}  // namespace jcpulse
