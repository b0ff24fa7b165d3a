#pragma once

#include <map>
#include <string>
#include <vector>

#include "devseq/corpus.hpp"

namespace devseq {

// Half-open token range of one entity.
struct EntitySpan {
  std::string type;
  int start = 0;
  int end = 0;

  bool operator==(const EntitySpan&) const = default;
  auto operator<=>(const EntitySpan&) const = default;
};

// Entity spans of a tag sequence. IO: a maximal run of identical I-T tags is
// one span (a type change splits). IOB: B-T starts a span; I-T continues a
// same-type span and otherwise starts one (conlleval's lenient treatment of
// orphan I tags).
std::vector<EntitySpan> extract_entities(const std::vector<std::string>& tags,
                                         TagScheme scheme);

struct TypeScore {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  // Percentages with the conlleval 0/0 -> 0 convention.
  double precision() const;
  double recall() const;
  double f1() const;
  long long support() const { return tp + fn; }  // gold spans
};

struct ScoreReport {
  std::map<std::string, TypeScore> per_type;
  TypeScore overall;  // micro-averaged
};

// Exact-match span scoring over aligned gold/pred tag sequences.
ScoreReport score(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& pred,
                  TagScheme scheme);
ScoreReport score(const Corpus& gold,
                  const std::vector<std::vector<std::string>>& pred);

// Fixed-width table, percentages to two decimals.
std::string format_report(const ScoreReport& report);
// CSV: type,precision,recall,f1,tp,fp,fn,support
std::string report_csv(const ScoreReport& report);

// Diagnostic only; never the headline metric.
double token_accuracy(const std::vector<std::vector<std::string>>& gold,
                      const std::vector<std::vector<std::string>>& pred);

}  // namespace devseq
