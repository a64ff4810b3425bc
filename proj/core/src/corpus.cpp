#include "clarity/corpus.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

std::string to_string(Source s) {
  switch (s) {
    case Source::moral_stories: return "moral_stories";
    case Source::ethics_justice: return "ethics_justice";
    case Source::ethics_deontology: return "ethics_deontology";
    case Source::ethics_virtue: return "ethics_virtue";
  }
  throw std::logic_error("unknown source");
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  throw std::logic_error("unknown split");
}

std::string to_string(Label l) { return l == Label::moral ? "moral" : "immoral"; }

Source source_from_string(const std::string& s) {
  if (s == "moral_stories") return Source::moral_stories;
  if (s == "ethics_justice") return Source::ethics_justice;
  if (s == "ethics_deontology") return Source::ethics_deontology;
  if (s == "ethics_virtue") return Source::ethics_virtue;
  throw std::invalid_argument("unknown source: " + s);
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation" || s == "dev" || s == "val") return Split::validation;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split: " + s);
}

EthicsConcept ethics_concept_from_string(const std::string& s) {
  if (s == "justice") return EthicsConcept::justice;
  if (s == "deontology") return EthicsConcept::deontology;
  if (s == "virtue") return EthicsConcept::virtue;
  throw std::invalid_argument("unknown ethics concept: " + s);
}

std::string to_string(EthicsConcept c) {
  switch (c) {
    case EthicsConcept::justice: return "justice";
    case EthicsConcept::deontology: return "deontology";
    case EthicsConcept::virtue: return "virtue";
  }
  throw std::logic_error("unknown ethics concept");
}

EthicsNorms EthicsNorms::from_file(const std::filesystem::path& path) {
  json j = json::parse(read_file(path));
  EthicsNorms norms;
  if (j.contains("justice")) norms.justice = j.at("justice").get<std::string>();
  if (j.contains("deontology")) norms.deontology = j.at("deontology").get<std::string>();
  if (j.contains("virtue")) norms.virtue = j.at("virtue").get<std::string>();
  return norms;
}

const std::string& EthicsNorms::of(EthicsConcept c) const {
  switch (c) {
    case EthicsConcept::justice: return justice;
    case EthicsConcept::deontology: return deontology;
    case EthicsConcept::virtue: return virtue;
  }
  throw std::logic_error("unknown ethics concept");
}

std::size_t Corpus::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [&](const MoralPair& p) { return p.split == split; }));
}

std::vector<ActionRecord> Corpus::actions(Split split) const {
  std::vector<ActionRecord> out;
  out.reserve(2 * pairs.size());
  for (const MoralPair& p : pairs) {
    if (p.split != split) continue;
    out.push_back({p.moral_action, Label::moral, p.pair_id, p.norm});
    out.push_back({p.immoral_action, Label::immoral, p.pair_id, p.norm});
  }
  return out;
}

const MoralPair* Corpus::find(const std::string& pair_id) const {
  for (const MoralPair& p : pairs)
    if (p.pair_id == pair_id) return &p;
  return nullptr;
}

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw std::runtime_error(where + ": missing or non-string field '" + key + "'");
  std::string v = trim(j.at(key).get<std::string>());
  if (v.empty())
    throw std::runtime_error(where + ": empty field '" + key + "'");
  return v;
}

void check_unique_ids(const Corpus& corpus, const std::string& where) {
  std::set<std::string> seen;
  for (const MoralPair& p : corpus.pairs)
    if (!seen.insert(p.pair_id).second)
      throw std::runtime_error(where + ": duplicate pair_id '" + p.pair_id + "'");
}

}  // namespace

Corpus load_moral_stories(const std::filesystem::path& path, Split default_split) {
  Corpus corpus;
  std::size_t line_no = 0;
  for (const json& j : read_jsonl(path)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    MoralPair p;
    p.norm = require_string(j, "norm", where);
    p.moral_action = require_string(j, "moral_action", where);
    p.immoral_action = require_string(j, "immoral_action", where);
    p.pair_id = j.contains("id") ? j.at("id").get<std::string>()
                                 : "ms-" + std::to_string(line_no);
    p.source = Source::moral_stories;
    p.split = j.contains("split") ? split_from_string(j.at("split").get<std::string>())
                                  : default_split;
    corpus.pairs.push_back(std::move(p));
  }
  if (corpus.pairs.empty())
    throw std::runtime_error(path.string() + ": empty corpus");
  check_unique_ids(corpus, path.string());
  return corpus;
}

namespace {

struct EthicsRow {
  int label = 0;  // native encoding: 1 = morally acceptable side
  std::vector<std::string> fields;
  std::size_t row_no = 0;
};

std::vector<EthicsRow> read_ethics_rows(const std::filesystem::path& path,
                                        std::size_t min_fields) {
  std::vector<std::vector<std::string>> raw = read_csv(path);
  if (raw.empty()) throw std::runtime_error(path.string() + ": empty corpus");
  std::size_t start = 0;
  // Header row, if present, has a non-numeric first field.
  if (!raw[0].empty()) {
    const std::string& f = raw[0][0];
    if (f != "0" && f != "1") start = 1;
  }
  std::vector<EthicsRow> rows;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const auto& fields = raw[i];
    if (fields.empty() || (fields.size() == 1 && trim(fields[0]).empty())) continue;
    const std::string where = path.string() + ":row " + std::to_string(i + 1);
    if (fields.size() < min_fields)
      throw std::runtime_error(where + ": expected at least " +
                               std::to_string(min_fields) + " fields");
    EthicsRow row;
    if (fields[0] == "0") row.label = 0;
    else if (fields[0] == "1") row.label = 1;
    else throw std::runtime_error(where + ": label must be 0 or 1, got '" + fields[0] + "'");
    row.fields = fields;
    row.row_no = i + 1;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": empty corpus");
  return rows;
}

std::string ethics_id(EthicsConcept c, std::size_t n) {
  return to_string(c) + "-" + std::to_string(n);
}

// Justice rows come in adjacent counterfactual pairs: row 2k and 2k+1 describe
// the same situation with opposing labels. label 1 = reasonable/just.
Corpus pair_justice(const std::vector<EthicsRow>& rows, const std::string& norm,
                    Split split, const std::string& file) {
  Corpus corpus;
  if (rows.size() % 2 != 0)
    throw std::runtime_error(file + ": unpaired row at end (odd row count)");
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const EthicsRow& a = rows[i];
    const EthicsRow& b = rows[i + 1];
    if (a.label == b.label)
      throw std::runtime_error(file + ":row " + std::to_string(b.row_no) +
                               ": adjacent rows do not have opposing labels");
    const EthicsRow& just = a.label == 1 ? a : b;
    const EthicsRow& unjust = a.label == 1 ? b : a;
    MoralPair p;
    p.pair_id = ethics_id(EthicsConcept::justice, corpus.pairs.size() + 1);
    p.norm = norm;
    p.moral_action = trim(just.fields[1]);
    p.immoral_action = trim(unjust.fields[1]);
    p.source = Source::ethics_justice;
    p.split = split;
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

// Virtue rows are "scenario [SEP] trait"; label 1 = trait fits. Rows sharing a
// scenario form a group; fitting and non-fitting traits are zipped in file
// order.
Corpus pair_virtue(const std::vector<EthicsRow>& rows, const std::string& norm,
                   Split split, const std::string& file, std::size_t& skipped) {
  struct Group {
    std::vector<std::string> fits, misfits;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (const EthicsRow& row : rows) {
    const std::string& text = row.fields[1];
    const std::string sep = " [SEP] ";
    auto at = text.find(sep);
    if (at == std::string::npos)
      throw std::runtime_error(file + ":row " + std::to_string(row.row_no) +
                               ": missing ' [SEP] ' delimiter");
    std::string scenario = trim(text.substr(0, at));
    std::string trait = trim(text.substr(at + sep.size()));
    if (!groups.count(scenario)) order.push_back(scenario);
    Group& g = groups[scenario];
    (row.label == 1 ? g.fits : g.misfits).push_back(scenario + sep + trait);
  }
  Corpus corpus;
  for (const std::string& scenario : order) {
    const Group& g = groups[scenario];
    if (g.fits.empty() || g.misfits.empty())
      throw std::runtime_error(file + ": unpaired row (scenario '" + scenario +
                               "' has only one label)");
    std::size_t n = std::min(g.fits.size(), g.misfits.size());
    for (std::size_t i = 0; i < n; ++i) {
      MoralPair p;
      p.pair_id = ethics_id(EthicsConcept::virtue, corpus.pairs.size() + 1);
      p.norm = norm;
      p.moral_action = g.fits[i];
      p.immoral_action = g.misfits[i];
      p.source = Source::ethics_virtue;
      p.split = split;
      corpus.pairs.push_back(std::move(p));
    }
    skipped += g.fits.size() + g.misfits.size() - 2 * n;
  }
  return corpus;
}

// Deontology rows are label,scenario,excuse; the action is the concatenation.
// label 1 = reasonable excuse. Rows group by scenario; reasonable and
// unreasonable excuses are zipped in file order.
Corpus pair_deontology(const std::vector<EthicsRow>& rows, const std::string& norm,
                       Split split, const std::string& file, std::size_t& skipped) {
  struct Group {
    std::vector<std::string> good, bad;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (const EthicsRow& row : rows) {
    std::string scenario = trim(row.fields[1]);
    std::string excuse = trim(row.fields[2]);
    if (!groups.count(scenario)) order.push_back(scenario);
    Group& g = groups[scenario];
    (row.label == 1 ? g.good : g.bad).push_back(scenario + " " + excuse);
  }
  Corpus corpus;
  for (const std::string& scenario : order) {
    const Group& g = groups[scenario];
    if (g.good.empty() || g.bad.empty())
      throw std::runtime_error(file + ": unpaired row (scenario '" + scenario +
                               "' has only one label)");
    std::size_t n = std::min(g.good.size(), g.bad.size());
    for (std::size_t i = 0; i < n; ++i) {
      MoralPair p;
      p.pair_id = ethics_id(EthicsConcept::deontology, corpus.pairs.size() + 1);
      p.norm = norm;
      p.moral_action = g.good[i];
      p.immoral_action = g.bad[i];
      p.source = Source::ethics_deontology;
      p.split = split;
      corpus.pairs.push_back(std::move(p));
    }
    skipped += g.good.size() + g.bad.size() - 2 * n;
  }
  return corpus;
}

}  // namespace

Corpus load_ethics(const std::filesystem::path& path, EthicsConcept kind,
                   const EthicsNorms& norms, Split default_split) {
  const std::string file = path.string();
  std::size_t skipped = 0;
  Corpus corpus;
  switch (kind) {
    case EthicsConcept::justice:
      corpus = pair_justice(read_ethics_rows(path, 2), norms.justice, default_split, file);
      break;
    case EthicsConcept::virtue:
      corpus = pair_virtue(read_ethics_rows(path, 2), norms.virtue, default_split, file,
                           skipped);
      break;
    case EthicsConcept::deontology:
      corpus = pair_deontology(read_ethics_rows(path, 3), norms.deontology,
                               default_split, file, skipped);
      break;
  }
  if (skipped > 0)
    log_info("load_ethics: " + file + ": skipped " + std::to_string(skipped) +
             " rows without a counterpart");
  if (corpus.pairs.empty()) throw std::runtime_error(file + ": empty corpus");
  return corpus;
}

void carve_validation(Corpus& corpus, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0) return;
  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i)
    if (corpus.pairs[i].split == Split::train) train_idx.push_back(i);
  if (train_idx.size() < 2) return;  // keep at least one train pair
  std::size_t take = static_cast<std::size_t>(std::llround(fraction * train_idx.size()));
  take = std::max<std::size_t>(take, 1);
  take = std::min(take, train_idx.size() - 1);
  std::mt19937_64 rng(seed);
  std::shuffle(train_idx.begin(), train_idx.end(), rng);
  for (std::size_t i = 0; i < take; ++i)
    corpus.pairs[train_idx[i]].split = Split::validation;
}

void append(Corpus& corpus, Corpus more) {
  for (MoralPair& p : more.pairs) corpus.pairs.push_back(std::move(p));
  check_unique_ids(corpus, "append");
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.reserve(corpus.pairs.size());
  for (const MoralPair& p : corpus.pairs) {
    lines.push_back(json{{"id", p.pair_id},
                         {"norm", p.norm},
                         {"moral_action", p.moral_action},
                         {"immoral_action", p.immoral_action},
                         {"source", to_string(p.source)},
                         {"split", to_string(p.split)}});
  }
  write_jsonl(path, lines);
}

Corpus load_corpus(const std::filesystem::path& path) {
  Corpus corpus;
  std::size_t line_no = 0;
  for (const json& j : read_jsonl(path)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    MoralPair p;
    p.pair_id = require_string(j, "id", where);
    p.norm = require_string(j, "norm", where);
    p.moral_action = require_string(j, "moral_action", where);
    p.immoral_action = require_string(j, "immoral_action", where);
    p.source = source_from_string(j.at("source").get<std::string>());
    p.split = split_from_string(j.at("split").get<std::string>());
    corpus.pairs.push_back(std::move(p));
  }
  if (corpus.pairs.empty()) throw std::runtime_error(path.string() + ": empty corpus");
  check_unique_ids(corpus, path.string());
  return corpus;
}

std::vector<Triplet> build_triplets(const Corpus& corpus, std::uint64_t rng_seed,
                                    const TripletOptions& opts) {
  std::vector<const MoralPair*> pool;
  for (const MoralPair& p : corpus.pairs)
    if (p.split == opts.split) pool.push_back(&p);
  if (pool.empty()) throw std::runtime_error("build_triplets: empty split");

  std::mt19937_64 rng(rng_seed);
  std::vector<Triplet> out;
  out.reserve(pool.size() * static_cast<std::size_t>(opts.negatives_per_anchor));
  for (const MoralPair* p : pool) {
    std::vector<const MoralPair*> candidates;
    for (const MoralPair* q : pool)
      if (q->norm != p->norm) candidates.push_back(q);
    if (candidates.empty())
      throw std::runtime_error("build_triplets: no valid negatives for pair '" +
                               p->pair_id + "' (all norms identical)");
    for (int k = 0; k < opts.negatives_per_anchor; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      const MoralPair* q = candidates[pick(rng)];
      Triplet t;
      t.anchor = {p->moral_action, Label::moral, p->pair_id, p->norm};
      t.positive = {p->immoral_action, Label::immoral, p->pair_id, p->norm};
      t.negative = {q->moral_action, Label::moral, q->pair_id, q->norm};
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace clarity
