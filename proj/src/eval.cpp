#include "devseq/eval.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace devseq {

std::vector<EntitySpan> extract_entities(const std::vector<std::string>& tags,
                                         TagScheme scheme) {
  std::vector<EntitySpan> spans;
  EntitySpan open;
  bool in_span = false;
  auto close = [&](int end) {
    if (in_span) {
      open.end = end;
      spans.push_back(open);
      in_span = false;
    }
  };
  for (int t = 0; t < static_cast<int>(tags.size()); ++t) {
    TagParts parts = parse_entity_tag(tags[static_cast<std::size_t>(t)], scheme);
    if (parts.prefix == 'O') {
      close(t);
      continue;
    }
    const bool continues = in_span && parts.prefix == 'I' && parts.type == open.type;
    if (!continues) {
      close(t);
      open = EntitySpan{parts.type, t, t};
      in_span = true;
    }
  }
  close(static_cast<int>(tags.size()));
  return spans;
}

double TypeScore::precision() const {
  return tp + fp == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double TypeScore::recall() const {
  return tp + fn == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double TypeScore::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ScoreReport score(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& pred,
                  TagScheme scheme) {
  if (gold.size() != pred.size()) {
    throw std::runtime_error("gold has " + std::to_string(gold.size()) +
                             " sentences but pred has " + std::to_string(pred.size()));
  }
  ScoreReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw std::runtime_error("sentence " + std::to_string(s + 1) + ": gold has " +
                               std::to_string(gold[s].size()) + " tokens but pred has " +
                               std::to_string(pred[s].size()));
    }
    const auto gold_spans = extract_entities(gold[s], scheme);
    const auto pred_spans = extract_entities(pred[s], scheme);
    std::set<EntitySpan> gold_set(gold_spans.begin(), gold_spans.end());
    for (const auto& span : pred_spans) {
      if (gold_set.count(span)) {
        ++report.per_type[span.type].tp;
      } else {
        ++report.per_type[span.type].fp;
      }
    }
    std::set<EntitySpan> pred_set(pred_spans.begin(), pred_spans.end());
    for (const auto& span : gold_spans) {
      if (!pred_set.count(span)) ++report.per_type[span.type].fn;
    }
  }
  for (const auto& [type, ts] : report.per_type) {
    report.overall.tp += ts.tp;
    report.overall.fp += ts.fp;
    report.overall.fn += ts.fn;
  }
  return report;
}

ScoreReport score(const Corpus& gold, const std::vector<std::vector<std::string>>& pred) {
  std::vector<std::vector<std::string>> gold_tags;
  gold_tags.reserve(gold.sentences.size());
  for (const auto& sent : gold.sentences) {
    std::vector<std::string> tags;
    tags.reserve(sent.tokens.size());
    for (const auto& tok : sent.tokens) tags.push_back(tok.entity);
    gold_tags.push_back(std::move(tags));
  }
  return score(gold_tags, pred, gold.scheme);
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void append_row(std::ostringstream& out, const std::string& name, const TypeScore& ts) {
  out << name;
  for (std::size_t i = name.size(); i < 12; ++i) out << ' ';
  auto cell = [&](const std::string& s) {
    for (std::size_t i = s.size(); i < 10; ++i) out << ' ';
    out << s;
  };
  cell(pct(ts.precision()));
  cell(pct(ts.recall()));
  cell(pct(ts.f1()));
  cell(std::to_string(ts.support()));
  out << '\n';
}

}  // namespace

std::string format_report(const ScoreReport& report) {
  std::ostringstream out;
  out << "type         precision    recall        f1   support\n";
  for (const auto& [type, ts] : report.per_type) append_row(out, type, ts);
  append_row(out, "overall", report.overall);
  return out.str();
}

std::string report_csv(const ScoreReport& report) {
  std::ostringstream out;
  out << "type,precision,recall,f1,tp,fp,fn,support\n";
  auto row = [&](const std::string& name, const TypeScore& ts) {
    out << name << ',' << pct(ts.precision()) << ',' << pct(ts.recall()) << ','
        << pct(ts.f1()) << ',' << ts.tp << ',' << ts.fp << ',' << ts.fn << ','
        << ts.support() << '\n';
  };
  for (const auto& [type, ts] : report.per_type) row(type, ts);
  row("overall", report.overall);
  return out.str();
}

double token_accuracy(const std::vector<std::vector<std::string>>& gold,
                      const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size()) {
    throw std::runtime_error("token_accuracy: sentence count mismatch");
  }
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw std::runtime_error("token_accuracy: sentence " + std::to_string(s + 1) +
                               " length mismatch");
    }
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      ++total;
      if (gold[s][t] == pred[s][t]) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace devseq
