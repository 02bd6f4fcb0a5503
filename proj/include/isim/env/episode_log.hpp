#pragma once

#include <array>
#include <string>
#include <vector>

#include "isim/env/metrics.hpp"

namespace isim::env {

// One persisted interview turn. The episode log is the unit of replay and
// audit; formats are versioned line-delimited text.
struct TurnRecord {
  int episode = 0;
  int turn = 0;
  std::string item;  // e.g. PHQ8:3 or PCLC:12
  int likert = -1;   // -1 when the item was skipped
  double confidence = 0;
  double reward = 0;
  bool skipped = false;
  std::array<double, kStateDim> s{};
  std::array<double, kActionDim> a{};
  std::array<double, kMetricDim> m{};
  std::vector<std::string> audit_kinds;
};

struct AuditLine {
  int episode = 0;
  int turn = 0;
  std::string kind;
  double proposed = 0;
  double applied = 0;
};

std::string episode_log_to_text(const std::vector<TurnRecord>& turns);
std::vector<TurnRecord> episode_log_from_text(const std::string& text);

std::string audit_log_to_text(const std::vector<AuditLine>& lines);
std::vector<AuditLine> audit_log_from_text(const std::string& text);

}  // namespace isim::env
