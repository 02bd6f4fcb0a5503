#include "isim/quest/items.hpp"

#include "isim/errors.hpp"

namespace isim::quest {

namespace {

const std::array<std::string_view, kPhq8Items> kPhq8Texts = {
    "Little interest or pleasure in doing things",
    "Feeling down, depressed, or hopeless",
    "Trouble falling or staying asleep, or sleeping too much",
    "Feeling tired or having little energy",
    "Poor appetite or overeating",
    "Feeling bad about yourself - or that you are a failure or have let "
    "yourself or your family down",
    "Trouble concentrating on things, such as reading or watching TV",
    "Moving or speaking noticeably slowly - or being fidgety/restless more "
    "than usual",
};

const std::array<std::string_view, kPclcItems> kPclcTexts = {
    "Repeated, disturbing memories, thoughts, or images of a stressful "
    "experience from the past?",
    "Repeated, disturbing dreams of a stressful experience from the past?",
    "Suddenly acting or feeling as if a stressful experience were happening "
    "again (as if reliving it)?",
    "Feeling very upset when something reminded you of a stressful experience "
    "from the past?",
    "Having physical reactions (e.g., heart pounding, trouble breathing, "
    "sweating) when reminded?",
    "Avoid thinking about or talking about a stressful experience or avoid "
    "having related feelings?",
    "Avoid activities or situations because they reminded you of a stressful "
    "experience from the past?",
    "Trouble remembering important parts of a stressful experience from the "
    "past?",
    "Loss of interest in things you used to enjoy?",
    "Feeling distant or cut off from other people?",
    "Feeling emotionally numb or unable to have loving feelings for those "
    "close to you?",
    "Feeling as if your future somehow will be cut short?",
    "Trouble falling or staying asleep?",
    "Feeling irritable or having angry outbursts?",
    "Having difficulty concentrating?",
    "Being \"super-alert\" or watchful on guard?",
    "Feeling jumpy or easily startled?",
};

}  // namespace

int likert_min(Instrument ins) { return ins == Instrument::PHQ8 ? 0 : 1; }
int likert_max(Instrument ins) { return ins == Instrument::PHQ8 ? 3 : 5; }

Cluster pclc_cluster(int index) {
  if (index < 1 || index > kPclcItems) throw shape_error("pclc_cluster: index out of range");
  if (index <= 5) return Cluster::B;
  if (index <= 12) return Cluster::C;
  return Cluster::D;
}

std::string_view item_text(const ItemId& id) {
  if (id.instrument == Instrument::PHQ8) {
    if (id.index < 1 || id.index > kPhq8Items) throw shape_error("item_text: PHQ8 index");
    return kPhq8Texts[id.index - 1];
  }
  if (id.index < 1 || id.index > kPclcItems) throw shape_error("item_text: PCLC index");
  return kPclcTexts[id.index - 1];
}

std::vector<ItemId> item_schedule() {
  std::vector<ItemId> schedule;
  schedule.reserve(kScheduleLength);
  for (int i = 1; i <= kPhq8Items; ++i)
    schedule.push_back({Instrument::PHQ8, i, Cluster::None});
  for (int i = 1; i <= kPclcItems; ++i)
    schedule.push_back({Instrument::PCLC, i, pclc_cluster(i)});
  return schedule;
}

std::string canonical_instrument_file() {
  std::string out;
  out += "# isim instruments v1\n";
  out += "# columns: instrument<TAB>index<TAB>cluster<TAB>text\n";
  for (int i = 1; i <= kPhq8Items; ++i) {
    out += "PHQ8\t" + std::to_string(i) + "\t-\t";
    out += kPhq8Texts[i - 1];
    out += "\n";
  }
  for (int i = 1; i <= kPclcItems; ++i) {
    const Cluster c = pclc_cluster(i);
    out += "PCLC\t" + std::to_string(i) + "\t";
    out += (c == Cluster::B ? "B" : c == Cluster::C ? "C" : "D");
    out += "\t";
    out += kPclcTexts[i - 1];
    out += "\n";
  }
  out += "# scoring PHQ8: likert 0-3, total 0-24, bands at 5/10/15/20, positive >= 10\n";
  out += "# scoring PCLC: likert 1-5, total 17-85, clusters B=1-5 C=6-12 D=13-17,\n";
  out += "#   symptomatic item >= 3, cluster rule B>=1 C>=3 D>=2, cutpoint 44-50\n";
  return out;
}

}  // namespace isim::quest
