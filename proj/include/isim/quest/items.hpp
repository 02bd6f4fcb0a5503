#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace isim::quest {

enum class Instrument { PHQ8, PCLC };

// PCL-C symptom clusters; PHQ-8 items carry None.
enum class Cluster { None, B, C, D };

struct ItemId {
  Instrument instrument;
  int index;  // 1-based within the instrument
  Cluster cluster;

  bool operator==(const ItemId&) const = default;
};

inline constexpr int kPhq8Items = 8;
inline constexpr int kPclcItems = 17;
inline constexpr int kScheduleLength = kPhq8Items + kPclcItems;

// Likert bounds per instrument (inclusive).
int likert_min(Instrument ins);
int likert_max(Instrument ins);

// Cluster membership for a PCL-C item index: B=1-5, C=6-12, D=13-17.
Cluster pclc_cluster(int index);

std::string_view item_text(const ItemId& id);

// The mandatory 25-item interview order: PHQ-8 Q1..Q8 then PCL-C Q1..Q17.
std::vector<ItemId> item_schedule();

// Canonical content of the versioned instrument data file (item texts and
// scoring constants). The repository ships this as data/instruments_v1.txt.
std::string canonical_instrument_file();

}  // namespace isim::quest
