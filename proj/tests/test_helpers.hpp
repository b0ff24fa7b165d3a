#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "devseq/corpus.hpp"
#include "devseq/unicode.hpp"

namespace devseq::testing {

#ifndef DEVSEQ_TEST_DATA_DIR
#error "DEVSEQ_TEST_DATA_DIR must be defined by the build"
#endif
#ifndef DEVSEQ_DATA_DIR
#error "DEVSEQ_DATA_DIR must be defined by the build"
#endif

inline std::string test_data_path(const std::string& name) {
  return std::string(DEVSEQ_TEST_DATA_DIR) + "/" + name;
}

inline std::string data_path(const std::string& name) {
  return std::string(DEVSEQ_DATA_DIR) + "/" + name;
}

// Reverses the golden files' \u{XXXX} escapes (and \\ for a backslash).
inline std::string unescape(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '\\') {
      out.push_back(s[i++]);
      continue;
    }
    if (i + 1 < s.size() && s[i + 1] == '\\') {
      out.push_back('\\');
      i += 2;
      continue;
    }
    if (i + 2 < s.size() && s[i + 1] == 'u' && s[i + 2] == '{') {
      std::size_t close = s.find('}', i + 3);
      if (close == std::string::npos) throw std::runtime_error("bad escape in: " + s);
      const auto cp = static_cast<char32_t>(std::stoul(s.substr(i + 3, close - i - 3), nullptr, 16));
      uni::append_utf8(out, cp);
      i = close + 1;
      continue;
    }
    throw std::runtime_error("bad escape in: " + s);
  }
  return out;
}

struct GoldenCase {
  std::string input;
  std::vector<std::string> clusters;
};

inline std::vector<GoldenCase> load_golden(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open golden file: " + path);
  std::vector<GoldenCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    GoldenCase c;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= line.size()) {
      std::size_t tab = line.find('\t', pos);
      std::string field = line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos);
      if (first) {
        c.input = unescape(field);
        first = false;
      } else {
        c.clusters.push_back(unescape(field));
      }
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

inline Sentence make_sentence(
    const std::vector<std::array<const char*, 3>>& rows) {
  Sentence s;
  for (const auto& r : rows) s.tokens.push_back(Token{r[0], r[1], r[2]});
  return s;
}

}  // namespace devseq::testing
