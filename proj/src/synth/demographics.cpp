#include "demographics.hpp"

#include <array>
#include <cstdio>
#include <span>
#include <string_view>

namespace hadmin::synth::demo {

namespace {

constexpr std::array<std::string_view, 64> kGiven{
    "Alden",   "Benedict", "Buford",  "Clement", "Dorian",  "Earnest", "Emery",   "Felix",
    "Garrett", "Harlan",   "Ignatius", "Jacob",  "Jasper",  "Kendall", "Lincoln", "Lucian",
    "Marlon",  "Maxwell",  "Nolan",   "Orson",   "Percival", "Quentin", "Reynaldo", "Rick",
    "Riley",   "Roderick", "Silas",   "Thurman", "Ulric",   "Vernon",  "Wendell", "Xavier",
    "Adele",   "Beatrice", "Cecily",  "Daphne",  "Eloise",  "Fiona",   "Gemma",   "Harriet",
    "Imogen",  "Juliet",   "Katrina", "Lorena",  "Mabel",   "Nadia",   "Odette",  "Pearl",
    "Rosalind", "Sabine",  "Tamsin",  "Ursula",  "Vivian",  "Winona",  "Yvette",  "Zelda",
    "Avery",   "Blair",    "Carson",  "Dakota",  "Emerson", "Finley",  "Harper",  "Jordan"};

constexpr std::array<std::string_view, 40> kOnset{
    "Ben", "Ton", "Gaes", "Mod", "Ver", "Kol", "Kra", "Frank", "Pon", "Chan", "Fel", "Qua", "Me",
    "Tom", "Bal", "Dor", "Hal", "Lan", "Mar", "Nor", "Os", "Pel", "Ros", "Sal", "Tar", "Vel",
    "Wal", "Bre", "Cor", "Del", "Fen", "Gar", "Hen", "Jas", "Kel", "Lor", "Mal", "Ner", "Ral", "Sten"};
constexpr std::array<std::string_view, 24> kMiddle{
    "de", "er", "lot", "to", "ri", "ve", "mer", "ka", "lin", "do", "se", "ra",
    "ne", "gi", "ber", "ro", "ta", "li", "mo", "sa", "ven", "ge", "la", "ni"};
constexpr std::array<std::string_view, 24> kCoda{
    "zus", "tel", "jonge", "lin", "te", "ets", "land", "tin", "ez", "ps", "ker", "xen",
    "berg", "ski", "son", "ley", "man", "ton", "well", "ford", "stead", "row", "by", "ham"};

constexpr std::array<std::string_view, 20> kRoads{
    "Hoedong-ro",      "Geumgwan-daero", "Beomnaenam-ro", "Dongbang",     "Jungang-ro",
    "Haean-ro",        "Sejong-daero",   "Cheongpa-ro",   "Seongnam-ro",  "Bongeunsa-ro",
    "Hannuri-daero",   "Gwangnaru-ro",   "Nonhyeon-ro",   "Dosan-daero",  "Eulji-ro",
    "Toegye-ro",       "Mapo-daero",     "Yeouidaebang-ro", "Gangnam-daero", "Sinchon-ro"};
constexpr std::array<std::string_view, 16> kCounties{
    "Yecheon-gun", "Geumsan-gun", "Pyeongchang-gun", "Hongcheon-gun", "Boeun-gun", "Damyang-gun",
    "Goryeong-gun", "Haenam-gun", "Inje-gun", "Jindo-gun", "Okcheon-gun", "Sancheong-gun",
    "Taean-gun", "Uiseong-gun", "Wando-gun", "Yeongam-gun"};
constexpr std::array<std::string_view, 16> kCities{
    "Gunsan-si", "Hanam-si", "Seoul-si", "Gimcheon-si", "Suwon-si", "Busan-si", "Daegu-si",
    "Incheon-si", "Gwangju-si", "Daejeon-si", "Ulsan-si", "Jeonju-si", "Cheongju-si",
    "Pohang-si", "Changwon-si", "Gangneung-si"};

template <std::size_t N>
std::string pick(Rng& rng, const std::array<std::string_view, N>& items) {
    return std::string(items[static_cast<std::size_t>(rng.below(N))]);
}

std::string digits(Rng& rng, int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.below(10)));
    return s;
}

} // namespace

std::string given_name(Rng& rng) { return pick(rng, kGiven); }

std::string surname(Rng& rng) {
    std::string s = pick(rng, kOnset);
    if (rng.bernoulli(0.5)) s += pick(rng, kMiddle);
    s += pick(rng, kCoda);
    return s;
}

std::string gender(Rng& rng) { return rng.bernoulli(0.5) ? "male" : "female"; }

Date birth_date(Rng& rng, int first_year, int last_year) {
    Date lo(first_year, 1, 1);
    Date hi(last_year, 12, 31);
    return lo.plus_days(static_cast<int>(rng.uniform_int(0, lo.days_until(hi))));
}

std::string phone(Rng& rng) {
    int n = static_cast<int>(rng.uniform_int(8, 12));
    std::string s = "+82";
    s.push_back(static_cast<char>('1' + rng.below(9)));
    return s + digits(rng, n - 1);
}

std::string personal_id(Date birth, const std::string& gender, Rng& rng) {
    char head[8];
    std::snprintf(head, sizeof head, "%02d%02u%02u", birth.year() % 100, birth.month(), birth.day());
    int code = (birth.year() >= 2000 ? 3 : 1) + (gender == "female" ? 1 : 0);
    return std::string(head) + "-" + std::to_string(code) + digits(rng, 6);
}

std::string address(Rng& rng) {
    std::string number = std::to_string(rng.uniform_int(1, 120));
    std::string road = pick(rng, kRoads);
    std::string county = pick(rng, kCounties);
    std::string city = pick(rng, kCities);
    return number + ", " + road + ", " + county + ", " + city;
}

} // namespace hadmin::synth::demo
