#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace clarity {

enum class Label : int { immoral = 0, moral = 1 };

enum class Source { moral_stories, ethics_justice, ethics_deontology, ethics_virtue };
enum class Split { train, validation, test };

std::string to_string(Source s);
std::string to_string(Split s);
std::string to_string(Label l);
Source source_from_string(const std::string& s);
Split split_from_string(const std::string& s);

/// A social norm with its two conflicting actions. The dataset atom.
struct MoralPair {
  std::string pair_id;
  std::string norm;
  std::string moral_action;
  std::string immoral_action;
  Source source = Source::moral_stories;
  Split split = Split::train;
};

/// One side of a MoralPair, labeled.
struct ActionRecord {
  std::string action;
  Label gold_label = Label::moral;
  std::string pair_id;
  std::string norm;
};

/// Anchor/positive share a pair; the negative is a moral action from a pair
/// under a different norm.
struct Triplet {
  ActionRecord anchor;
  ActionRecord positive;
  ActionRecord negative;
};

struct Corpus {
  std::vector<MoralPair> pairs;

  std::size_t size() const { return pairs.size(); }
  std::size_t count(Split split) const;
  /// Both actions of every pair in `split`, pair order, moral side first.
  std::vector<ActionRecord> actions(Split split) const;
  const MoralPair* find(const std::string& pair_id) const;
};

enum class EthicsConcept { justice, deontology, virtue };
EthicsConcept ethics_concept_from_string(const std::string& s);
std::string to_string(EthicsConcept c);

/// Concept-definition sentences used as the supervision norm for ETHICS pairs.
struct EthicsNorms {
  std::string justice =
      "Justice: Giving people what they are due.";
  std::string deontology =
      "Deontology: encompasses whether the act is required, permitted, or "
      "forbidden according to a set of rules or constraints.";
  std::string virtue = "Virtue: acting as a virtuous person would act.";

  static EthicsNorms from_file(const std::filesystem::path& path);
  const std::string& of(EthicsConcept c) const;
};

/// Loads line-delimited records {"norm","moral_action","immoral_action"} with
/// optional "id" and "split". Records without a split field land in
/// `default_split`.
Corpus load_moral_stories(const std::filesystem::path& path,
                          Split default_split = Split::train);

/// Converts a native ETHICS concept file (CSV rows of label,scenario[,excuse])
/// into MoralPairs under the concept's pairing rule.
Corpus load_ethics(const std::filesystem::path& path, EthicsConcept kind,
                   const EthicsNorms& norms = EthicsNorms{},
                   Split default_split = Split::train);

/// Moves a seeded sample of train pairs (at least one, when possible) into the
/// validation split.
void carve_validation(Corpus& corpus, double fraction, std::uint64_t seed);

void append(Corpus& corpus, Corpus more);

/// Canonical corpus format: one JSON object per line, all fields explicit.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

struct TripletOptions {
  int negatives_per_anchor = 1;
  Split split = Split::train;
};

/// One triplet per pair of the chosen split (times negatives_per_anchor);
/// negatives are drawn uniformly from moral actions of pairs under a different
/// norm. Deterministic for a fixed seed.
std::vector<Triplet> build_triplets(const Corpus& corpus, std::uint64_t rng_seed,
                                    const TripletOptions& opts = {});

}  // namespace clarity
