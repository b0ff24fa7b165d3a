#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "devseq/corpus.hpp"

namespace devseq {

// Attached Nepali post-positions, stripped from token ends. The shipped
// default list (data/postpositions.txt) carries the common forms; the full
// 299-entry list is user-supplied.
struct PostpositionList {
  std::vector<std::string> suffixes;  // deduplicated, longest first
  int min_stem_graphemes = 1;

  std::size_t size() const { return suffixes.size(); }
};

// One suffix per line, UTF-8; '#' starts a comment line; surrounding ASCII
// whitespace is trimmed. An empty effective list is an error.
PostpositionList load_postpositions(std::istream& in, int min_stem_graphemes = 1);
PostpositionList load_postpositions_file(const std::string& path,
                                         int min_stem_graphemes = 1);

// Longest listed suffix is removed when it aligns on a grapheme-cluster
// boundary and the remaining stem keeps at least min_stem_graphemes clusters;
// otherwise the token is returned unchanged. At most one suffix is removed.
std::string lemmatize_token(const std::string& token, const PostpositionList& list);

// Per-token surface map; POS/entity tags and sentence boundaries untouched.
Corpus lemmatize_corpus(const Corpus& corpus, const PostpositionList& list);

}  // namespace devseq
