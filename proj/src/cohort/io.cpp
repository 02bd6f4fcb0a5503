#include "isim/cohort/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "isim/errors.hpp"

namespace isim::cohort {

namespace {

constexpr const char* kHeader = "# isim cohort v1";

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string cohort_to_text(const Cohort& cohort) {
  std::string out = kHeader;
  out += "\n# id phq8[8] pclc[17] base_latency utterance_scale au4 au12 gaze jitter pause\n";
  for (const auto& p : cohort) {
    out += std::to_string(p.id);
    for (int s : p.phq8_latent) {
      out += ' ';
      out += std::to_string(s);
    }
    for (int s : p.pclc_latent) {
      out += ' ';
      out += std::to_string(s);
    }
    for (double v : {p.base_latency, p.utterance_scale, p.au4_intensity,
                     p.au12_intensity, p.gaze_aversion, p.prosody_jitter,
                     p.pause_rate}) {
      out += ' ';
      append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

Cohort cohort_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw io_error("cohort: missing or unsupported header");
  Cohort cohort;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PatientProfile p;
    if (!(ls >> p.id)) throw io_error("cohort: bad id field");
    for (auto& s : p.phq8_latent)
      if (!(ls >> s)) throw io_error("cohort: truncated PHQ-8 items");
    for (auto& s : p.pclc_latent)
      if (!(ls >> s)) throw io_error("cohort: truncated PCL-C items");
    if (!(ls >> p.base_latency >> p.utterance_scale >> p.au4_intensity >>
          p.au12_intensity >> p.gaze_aversion >> p.prosody_jitter >> p.pause_rate))
      throw io_error("cohort: truncated behavioral fields");
    cohort.push_back(p);
  }
  return cohort;
}

void save_cohort(const Cohort& cohort, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cohort: cannot open for writing: " + path);
  out << cohort_to_text(cohort);
  if (!out) throw io_error("cohort: write failed: " + path);
}

Cohort load_cohort(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cohort: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return cohort_from_text(ss.str());
}

}  // namespace isim::cohort
