// devseq: grapheme-aware Devanagari sequence labeling toolkit.
//
// Subcommands: segment, lemmatize, split, stats, embed-analyze, train,
// predict, eval, sweep-dropout. See README.md for examples.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "devseq/analysis.hpp"
#include "devseq/checkpoint.hpp"
#include "devseq/corpus.hpp"
#include "devseq/embedding.hpp"
#include "devseq/eval.hpp"
#include "devseq/morphology.hpp"
#include "devseq/pipeline.hpp"
#include "devseq/unicode.hpp"

namespace {

using namespace devseq;

std::string read_stream(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

Corpus load_corpus_arg(const std::string& path, const std::string& scheme,
                       const std::string& columns) {
  std::optional<ColumnMap> cm;
  if (!columns.empty()) {
    ColumnMap m;
    if (std::sscanf(columns.c_str(), "%d:%d,%d,%d", &m.count, &m.surface, &m.pos,
                    &m.entity) != 4) {
      throw std::runtime_error("--columns expects COUNT:SURFACE,POS,ENTITY");
    }
    cm = m;
  }
  return load_conll_file(path, tag_scheme_from_string(scheme), cm);
}

// Flat key=value config file mirroring TrainConfig; '#' starts a comment.
TrainConfig load_train_config(const std::string& path) {
  TrainConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected key=value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "hidden_size") cfg.model.hidden_size = std::stoi(value);
    else if (key == "word_emb_dim") cfg.model.word_emb_dim = std::stoi(value);
    else if (key == "word_emb_trainable") cfg.model.word_emb_trainable = value == "true";
    else if (key == "subword") cfg.model.subword = subword_mode_from_string(value);
    else if (key == "subword_emb_dim") cfg.model.subword_emb_dim = std::stoi(value);
    else if (key == "cnn_filter_widths") {
      cfg.model.cnn_filter_widths.clear();
      std::istringstream widths(value);
      std::string w;
      while (std::getline(widths, w, ',')) cfg.model.cnn_filter_widths.push_back(std::stoi(w));
    } else if (key == "cnn_filters_per_width") cfg.model.cnn_filters_per_width = std::stoi(value);
    else if (key == "cnn_output_dim") cfg.model.cnn_output_dim = std::stoi(value);
    else if (key == "use_pos") cfg.model.use_pos = value == "true";
    else if (key == "use_crf") cfg.model.use_crf = value == "true";
    else if (key == "dropout") cfg.model.dropout_rate = std::stod(value);
    else if (key == "lr") cfg.lr = std::stod(value);
    else if (key == "weight_decay") cfg.weight_decay = std::stod(value);
    else if (key == "adam_beta1") cfg.adam_beta1 = std::stod(value);
    else if (key == "adam_beta2") cfg.adam_beta2 = std::stod(value);
    else if (key == "adam_eps") cfg.adam_eps = std::stod(value);
    else if (key == "max_epochs") cfg.max_epochs = std::stoi(value);
    else if (key == "patience") cfg.patience = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "embeddings") cfg.embeddings_path = value;
    else if (key == "min_count") cfg.min_count = std::stoul(value);
    else if (key == "label") cfg.label_source = value == "pos" ? LabelSource::Pos : LabelSource::Entity;
    else throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

std::string train_config_json(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "{\"lr\":" << cfg.lr << ",\"weight_decay\":" << cfg.weight_decay
      << ",\"max_epochs\":" << cfg.max_epochs << ",\"patience\":" << cfg.patience
      << ",\"seed\":" << cfg.seed << ",\"min_count\":" << cfg.min_count << "}";
  return out.str();
}

int cmd_segment(const std::string& mode, const std::string& delimiter) {
  const SegmentationMode m = mode == "char" ? SegmentationMode::Character
                                            : SegmentationMode::Grapheme;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto parts = segment(line, m);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) std::cout << delimiter;
      std::cout << parts[i];
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_lemmatize(const std::string& postpositions, int min_stem,
                  const std::string& in_path, const std::string& out_path,
                  const std::string& scheme) {
  const PostpositionList list = load_postpositions_file(postpositions, min_stem);
  std::cerr << "loaded " << list.size() << " post-positions\n";
  Corpus corpus;
  if (in_path.empty()) {
    corpus = parse_conll(read_stream(std::cin), tag_scheme_from_string(scheme));
  } else {
    corpus = load_corpus_arg(in_path, scheme, "");
  }
  const Corpus out = lemmatize_corpus(corpus, list);
  if (out_path.empty()) {
    std::cout << write_conll(out);
  } else {
    save_conll_file(out, out_path);
  }
  return 0;
}

int cmd_split(const std::string& in_path, const std::string& scheme,
              const std::string& ratios, std::uint64_t seed,
              const std::string& out_prefix) {
  double r1 = 0, r2 = 0, r3 = 0;
  if (std::sscanf(ratios.c_str(), "%lf,%lf,%lf", &r1, &r2, &r3) != 3) {
    throw std::runtime_error("--ratios expects three comma-separated fractions");
  }
  const Corpus corpus = load_corpus_arg(in_path, scheme, "");
  const CorpusSplit split = split_corpus(corpus, r1, r2, r3, seed);
  save_conll_file(split.train, out_prefix + ".train");
  save_conll_file(split.dev, out_prefix + ".dev");
  save_conll_file(split.test, out_prefix + ".test");
  std::cout << "train " << split.train.sentences.size() << " sentences\n"
            << "dev   " << split.dev.sentences.size() << " sentences\n"
            << "test  " << split.test.sentences.size() << " sentences\n";
  return 0;
}

int cmd_stats(const std::string& in_path, const std::string& scheme,
              const std::string& columns) {
  const Corpus corpus = load_corpus_arg(in_path, scheme, columns);
  std::cout << format_stats(corpus_stats(corpus));
  return 0;
}

int cmd_embed_analyze(const std::string& vectors_path, const std::string& word,
                      int k, const std::string& pca_out) {
  const EmbeddingTable table = load_embeddings_file(vectors_path);
  if (table.duplicate_count() > 0) {
    std::cerr << "warning: " << table.duplicate_count()
              << " duplicate embedding entries ignored (first kept)\n";
  }
  if (!word.empty()) {
    const NeighborResult result = nearest_neighbors(table, word, k);
    if (result.truncated) {
      std::cerr << "note: table has fewer than " << k << " candidates\n";
    }
    for (const auto& n : result.neighbors) {
      std::cout << n.word << '\t' << n.similarity << '\n';
    }
  }
  if (!pca_out.empty()) {
    const auto words = table.sorted_words();
    std::vector<std::vector<double>> data;
    data.reserve(words.size());
    for (const auto& w : words) data.push_back(table.lookup(w));
    const Projection2D proj = pca_project(data);
    write_file(pca_out, projection_csv(proj, words));
    std::cerr << "explained variance: " << proj.explained_variance[0] << ", "
              << proj.explained_variance[1] << '\n';
  }
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& scheme,
              const std::string& columns, const std::string& out_path,
              std::optional<std::uint64_t> seed) {
  TrainConfig cfg = load_train_config(config_path);
  if (seed) cfg.seed = *seed;
  const Corpus train_corpus = load_corpus_arg(train_path, scheme, columns);
  const Corpus dev_corpus = load_corpus_arg(dev_path, scheme, columns);
  TrainResult result = train(cfg, train_corpus, dev_corpus, nullptr, &std::cerr);
  save_checkpoint(result.model, out_path, train_config_json(cfg));
  write_file(out_path + ".history", result.history.to_text());
  std::cerr << "best_epoch=" << result.history.best_epoch
            << " stopped_epoch=" << result.history.stopped_epoch << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& in_path,
                const std::string& out_path, const std::string& scheme,
                const std::string& columns) {
  SequenceLabeler model = load_checkpoint(model_path);
  const Corpus corpus = load_corpus_arg(in_path, scheme, columns);
  Corpus out = corpus;
  for (auto& sent : out.sentences) {
    const auto tags = model.predict(sent);
    for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
      sent.tokens[t].entity = tags[t];
    }
  }
  if (out_path.empty()) {
    std::cout << write_conll(out);
  } else {
    save_conll_file(out, out_path);
  }
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             const std::string& scheme, const std::string& columns, bool csv) {
  const Corpus gold = load_corpus_arg(gold_path, scheme, columns);
  const Corpus pred = load_corpus_arg(pred_path, scheme, columns);
  std::vector<std::vector<std::string>> pred_tags;
  pred_tags.reserve(pred.sentences.size());
  for (const auto& sent : pred.sentences) {
    std::vector<std::string> tags;
    for (const auto& tok : sent.tokens) tags.push_back(tok.entity);
    pred_tags.push_back(std::move(tags));
  }
  const ScoreReport report = score(gold, pred_tags);
  std::cout << (csv ? report_csv(report) : format_report(report));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& scheme,
              const std::string& rates_arg, const std::string& out_csv) {
  TrainConfig cfg = load_train_config(config_path);
  std::vector<double> rates;
  std::istringstream in(rates_arg);
  std::string token;
  while (std::getline(in, token, ',')) rates.push_back(std::stod(token));
  const Corpus train_corpus = load_corpus_arg(train_path, scheme, "");
  const Corpus dev_corpus = load_corpus_arg(dev_path, scheme, "");
  const auto rows = dropout_sweep(cfg, rates, train_corpus, dev_corpus, &std::cerr);
  const std::string csv = sweep_csv(rows);
  if (out_csv.empty()) {
    std::cout << csv;
  } else {
    write_file(out_csv, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grapheme-aware Devanagari sequence labeling toolkit"};
  app.require_subcommand(1);

  std::string mode = "grapheme", delimiter = " ";
  auto* segment_cmd = app.add_subcommand("segment", "Segment UTF-8 lines from stdin");
  segment_cmd->add_option("--mode", mode, "char or grapheme")
      ->check(CLI::IsMember({"char", "grapheme"}));
  segment_cmd->add_option("--delimiter", delimiter, "separator between clusters");

  std::string postpositions, in_path, out_path, scheme = "io";
  int min_stem = 1;
  auto* lemmatize_cmd = app.add_subcommand("lemmatize", "Strip attached post-positions");
  lemmatize_cmd->add_option("--postpositions", postpositions, "suffix list file")->required();
  lemmatize_cmd->add_option("--min-stem", min_stem, "minimum stem clusters");
  lemmatize_cmd->add_option("--in", in_path, "input CoNLL file (default stdin)");
  lemmatize_cmd->add_option("--out", out_path, "output CoNLL file (default stdout)");
  lemmatize_cmd->add_option("--scheme", scheme, "io or iob");

  std::string split_in, split_ratios = "0.64,0.16,0.20", split_prefix, split_scheme = "io";
  std::uint64_t split_seed = 42;
  auto* split_cmd = app.add_subcommand("split", "Sentence-level train/dev/test split");
  split_cmd->add_option("--in", split_in)->required();
  split_cmd->add_option("--ratios", split_ratios, "train,dev,test fractions");
  split_cmd->add_option("--seed", split_seed);
  split_cmd->add_option("--out-prefix", split_prefix)->required();
  split_cmd->add_option("--scheme", split_scheme);

  std::string stats_in, stats_scheme = "io", stats_columns;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  stats_cmd->add_option("--in", stats_in)->required();
  stats_cmd->add_option("--scheme", stats_scheme);
  stats_cmd->add_option("--columns", stats_columns, "COUNT:SURFACE,POS,ENTITY");

  std::string vec_path, query_word, pca_out;
  int k = 10;
  auto* embed_cmd = app.add_subcommand("embed-analyze", "Nearest neighbors and 2-D PCA");
  embed_cmd->add_option("--vectors", vec_path)->required();
  embed_cmd->add_option("--word", query_word);
  embed_cmd->add_option("--k", k);
  embed_cmd->add_option("--pca-out", pca_out, "write word,x,y CSV");

  std::string cfg_path, train_path, dev_path, train_scheme = "io", train_columns,
      ckpt_out = "model.ckpt";
  std::uint64_t seed_arg = 0;
  bool seed_given = false;
  auto* train_cmd = app.add_subcommand("train", "Train a sequence labeler");
  train_cmd->add_option("--config", cfg_path, "key=value config file");
  train_cmd->add_option("--train", train_path)->required();
  train_cmd->add_option("--dev", dev_path)->required();
  train_cmd->add_option("--scheme", train_scheme);
  train_cmd->add_option("--columns", train_columns, "COUNT:SURFACE,POS,ENTITY");
  train_cmd->add_option("--out", ckpt_out);
  train_cmd->add_option("--seed", seed_arg, "umbrella seed; derives all sub-seeds")
      ->each([&seed_given](const std::string&) { seed_given = true; });

  std::string model_path, pred_in, pred_out, pred_scheme = "io", pred_columns;
  auto* predict_cmd = app.add_subcommand("predict", "Tag a corpus with a checkpoint");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--in", pred_in)->required();
  predict_cmd->add_option("--out", pred_out);
  predict_cmd->add_option("--scheme", pred_scheme);
  predict_cmd->add_option("--columns", pred_columns, "COUNT:SURFACE,POS,ENTITY");

  std::string gold_path, predfile_path, eval_scheme = "io", eval_columns;
  bool eval_csv = false;
  auto* eval_cmd = app.add_subcommand("eval", "Entity-level precision/recall/F1");
  eval_cmd->add_option("--gold", gold_path)->required();
  eval_cmd->add_option("--pred", predfile_path)->required();
  eval_cmd->add_option("--scheme", eval_scheme);
  eval_cmd->add_option("--columns", eval_columns, "COUNT:SURFACE,POS,ENTITY");
  eval_cmd->add_flag("--csv", eval_csv);

  std::string sweep_cfg, sweep_train, sweep_dev, sweep_scheme = "io", sweep_rates, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep-dropout", "Train once per dropout rate");
  sweep_cmd->add_option("--config", sweep_cfg);
  sweep_cmd->add_option("--train", sweep_train)->required();
  sweep_cmd->add_option("--dev", sweep_dev)->required();
  sweep_cmd->add_option("--scheme", sweep_scheme);
  sweep_cmd->add_option("--rates", sweep_rates)->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (segment_cmd->parsed()) return cmd_segment(mode, delimiter);
    if (lemmatize_cmd->parsed()) {
      return cmd_lemmatize(postpositions, min_stem, in_path, out_path, scheme);
    }
    if (split_cmd->parsed()) {
      return cmd_split(split_in, split_scheme, split_ratios, split_seed, split_prefix);
    }
    if (stats_cmd->parsed()) return cmd_stats(stats_in, stats_scheme, stats_columns);
    if (embed_cmd->parsed()) return cmd_embed_analyze(vec_path, query_word, k, pca_out);
    if (train_cmd->parsed()) {
      return cmd_train(cfg_path, train_path, dev_path, train_scheme, train_columns,
                       ckpt_out,
                       seed_given ? std::optional<std::uint64_t>(seed_arg) : std::nullopt);
    }
    if (predict_cmd->parsed()) {
      return cmd_predict(model_path, pred_in, pred_out, pred_scheme, pred_columns);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(gold_path, predfile_path, eval_scheme, eval_columns, eval_csv);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_cfg, sweep_train, sweep_dev, sweep_scheme, sweep_rates, sweep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
