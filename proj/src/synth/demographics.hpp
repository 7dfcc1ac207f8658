#pragma once

#include "hadmin/core/rng.hpp"
#include "hadmin/core/time.hpp"

#include <string>

namespace hadmin::synth::demo {

std::string given_name(Rng& rng);
std::string surname(Rng& rng);
std::string gender(Rng& rng);
Date birth_date(Rng& rng, int first_year, int last_year);
/// "+82" followed by 8 to 12 digits.
std::string phone(Rng& rng);
/// Resident-registration style "YYMMDD-NNNNNNN"; the first digit after the dash encodes
/// century and gender.
std::string personal_id(Date birth, const std::string& gender, Rng& rng);
/// "18, Beomnaenam-ro, Yecheon-gun, Gunsan-si"
std::string address(Rng& rng);

} // namespace hadmin::synth::demo
