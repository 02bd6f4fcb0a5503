#include "isim/env/episode_log.hpp"

#include <cstdio>
#include <sstream>

#include "isim/errors.hpp"

namespace isim::env {

namespace {

constexpr const char* kLogHeader = "# isim episode-log v1";
constexpr const char* kAuditHeader = "# isim audit v1";

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

template <std::size_t N>
void append_block(std::string& out, const std::array<double, N>& xs) {
  for (double v : xs) {
    out += ' ';
    append_num(out, v);
  }
}

template <std::size_t N>
void read_block(std::istringstream& in, std::array<double, N>& xs, const char* what) {
  for (auto& v : xs)
    if (!(in >> v)) throw io_error(std::string("episode log: truncated ") + what);
}

}  // namespace

std::string episode_log_to_text(const std::vector<TurnRecord>& turns) {
  std::string out = kLogHeader;
  out +=
      "\n# ep turn item likert confidence reward skipped s[20] a[5] m[10] audits\n";
  for (const auto& t : turns) {
    out += std::to_string(t.episode);
    out += ' ';
    out += std::to_string(t.turn);
    out += ' ';
    out += t.item;
    out += ' ';
    out += std::to_string(t.likert);
    out += ' ';
    append_num(out, t.confidence);
    out += ' ';
    append_num(out, t.reward);
    out += t.skipped ? " 1" : " 0";
    append_block(out, t.s);
    append_block(out, t.a);
    append_block(out, t.m);
    out += ' ';
    if (t.audit_kinds.empty()) {
      out += '-';
    } else {
      for (std::size_t i = 0; i < t.audit_kinds.size(); ++i) {
        if (i) out += ';';
        out += t.audit_kinds[i];
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<TurnRecord> episode_log_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader)
    throw io_error("episode log: missing or unsupported header");
  std::vector<TurnRecord> turns;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    TurnRecord t;
    int skipped = 0;
    if (!(ls >> t.episode >> t.turn >> t.item >> t.likert >> t.confidence >>
          t.reward >> skipped))
      throw io_error("episode log: bad turn line");
    t.skipped = skipped != 0;
    read_block(ls, t.s, "state");
    read_block(ls, t.a, "action");
    read_block(ls, t.m, "metrics");
    std::string audits;
    if (!(ls >> audits)) throw io_error("episode log: missing audit field");
    if (audits != "-") {
      std::istringstream as(audits);
      std::string kind;
      while (std::getline(as, kind, ';')) t.audit_kinds.push_back(kind);
    }
    turns.push_back(std::move(t));
  }
  return turns;
}

std::string audit_log_to_text(const std::vector<AuditLine>& lines) {
  std::string out = kAuditHeader;
  out += "\n# ep turn kind proposed applied\n";
  for (const auto& l : lines) {
    out += std::to_string(l.episode);
    out += ' ';
    out += std::to_string(l.turn);
    out += ' ';
    out += l.kind;
    out += ' ';
    append_num(out, l.proposed);
    out += ' ';
    append_num(out, l.applied);
    out += '\n';
  }
  return out;
}

std::vector<AuditLine> audit_log_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kAuditHeader)
    throw io_error("audit log: missing or unsupported header");
  std::vector<AuditLine> lines;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    AuditLine l;
    if (!(ls >> l.episode >> l.turn >> l.kind >> l.proposed >> l.applied))
      throw io_error("audit log: bad line");
    lines.push_back(std::move(l));
  }
  return lines;
}

}  // namespace isim::env
