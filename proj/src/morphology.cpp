#include "devseq/morphology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "devseq/unicode.hpp"

namespace devseq {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

PostpositionList load_postpositions(std::istream& in, int min_stem_graphemes) {
  if (min_stem_graphemes < 1) {
    throw std::runtime_error("min_stem_graphemes must be positive");
  }
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    seen.insert(entry);
  }
  if (seen.empty()) {
    throw std::runtime_error("post-position list is empty; lemmatization would be a no-op");
  }
  PostpositionList list;
  list.min_stem_graphemes = min_stem_graphemes;
  list.suffixes.assign(seen.begin(), seen.end());
  std::sort(list.suffixes.begin(), list.suffixes.end(),
            [](const std::string& a, const std::string& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a < b;
            });
  return list;
}

PostpositionList load_postpositions_file(const std::string& path, int min_stem_graphemes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open post-position file: " + path);
  try {
    return load_postpositions(in, min_stem_graphemes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string lemmatize_token(const std::string& token, const PostpositionList& list) {
  if (token.empty()) return token;
  const auto clusters = segment_graphemes(token);

  // Byte offsets at which a grapheme cluster begins, and the cluster count
  // before each offset.
  std::vector<std::size_t> starts;
  starts.reserve(clusters.size());
  std::size_t off = 0;
  for (const auto& c : clusters) {
    starts.push_back(off);
    off += c.text.size();
  }

  for (const auto& suffix : list.suffixes) {  // longest first
    if (suffix.size() >= token.size()) continue;  // stem would be empty
    if (token.compare(token.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::size_t cut = token.size() - suffix.size();
    auto it = std::lower_bound(starts.begin(), starts.end(), cut);
    if (it == starts.end() || *it != cut) continue;  // cut splits a cluster
    const auto stem_clusters = static_cast<int>(it - starts.begin());
    if (stem_clusters < list.min_stem_graphemes) continue;
    return token.substr(0, cut);
  }
  return token;
}

Corpus lemmatize_corpus(const Corpus& corpus, const PostpositionList& list) {
  Corpus out = corpus;
  for (auto& sent : out.sentences) {
    for (auto& tok : sent.tokens) {
      tok.surface = lemmatize_token(tok.surface, list);
    }
  }
  return out;
}

}  // namespace devseq
