// Shared helpers for the test suites: scratch directories and hand-rolled
// random-statement generators for the property tests.
#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ff/corpus.hpp"

namespace fftest {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::to_string(
        std::chrono::steady_clock::now().time_since_epoch().count());
    path_ = std::filesystem::temp_directory_path() /
            ("ff_test_" + stamp + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path data_dir() { return std::filesystem::path(FF_DATA_DIR); }

// Random but pronounceable clause: 1-4 lowercase words, optionally
// capitalized at the front like the shipped corpora store them.
inline std::string random_clause(std::mt19937_64& rng, bool capitalize_first) {
  static const std::vector<std::string> kWords = {
      "rain",    "flooding", "smoke",   "pressure", "growth",  "erosion",
      "deficit", "exposure", "decline", "risk",     "storms",  "drought",
      "fatigue", "stress",   "noise",   "heat",     "frost",   "runoff"};
  std::uniform_int_distribution<size_t> word_count(1, 4);
  std::uniform_int_distribution<size_t> pick(0, kWords.size() - 1);
  const size_t n = word_count(rng);
  std::string clause;
  for (size_t i = 0; i < n; ++i) {
    if (i) clause += ' ';
    clause += kWords[pick(rng)];
  }
  if (capitalize_first && !clause.empty()) {
    clause[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(clause[0])));
  }
  return clause;
}

inline ff::Statement random_statement(std::mt19937_64& rng, int index) {
  ff::Statement s;
  s.id = "r" + std::to_string(index);
  s.domain = ff::Domain::other("synthetic");
  s.antecedent = random_clause(rng, true);
  // Distinct consequent so the eight surface forms stay distinguishable.
  do {
    s.consequent = random_clause(rng, false);
  } while (s.consequent == s.antecedent);
  std::uniform_int_distribution<int> coin(0, 3);
  if (coin(rng) == 0) s.antecedent_neg = "absent " + s.antecedent;
  if (coin(rng) == 0) s.consequent_neg = "absent " + s.consequent;
  if (coin(rng) == 0) s.source = "synthetic generator";
  return s;
}

}  // namespace fftest
