#pragma once

#include <string>

#include "isim/cohort/profile.hpp"

namespace isim::cohort {

// Line-delimited cohort export: versioned header, one patient per line.
// Floating-point fields round-trip exactly (printed with max precision).
std::string cohort_to_text(const Cohort& cohort);
Cohort cohort_from_text(const std::string& text);

void save_cohort(const Cohort& cohort, const std::string& path);
Cohort load_cohort(const std::string& path);

}  // namespace isim::cohort
