#pragma once

#include <optional>
#include <string>

namespace clarity {

/// The four prompt families the pipeline sends out.
enum class PromptKind {
  rationale_two_step,
  claritycot,
  zero_shot_judgment,
  norm_generation_baseline,
};

std::string to_string(PromptKind kind);
PromptKind prompt_kind_from_string(const std::string& s);

/// Frozen prompt texts. Slot values are inserted verbatim; callers must not
/// rely on the template adding punctuation around them.
namespace prompts {

/// Asks an assistant model for one moral and one immoral rationale, given the
/// norm and the two actions it separates.
std::string rationale_curation(const std::string& norm, const std::string& moral_action,
                               const std::string& immoral_action);

/// Self-contained chain-of-thought judgment prompt for a single action.
std::string claritycot(const std::string& action);

/// Plain yes/no judgment prompt, no reasoning scaffold.
std::string zero_shot(const std::string& action);

/// Asks for one short social norm per action of a pair.
std::string norm_elicitation(const std::string& moral_action,
                             const std::string& immoral_action);

}  // namespace prompts

struct RationalePair {
  std::string moral_rationale;
  std::string immoral_rationale;
};

/// Extracts the two rationales from a free-form curation response. Accepts
/// labeled sections ("moral rationale:" / "immoral rationale:") or Action 1 /
/// Action 2 sections. Empty optional when either segment is missing or empty.
std::optional<RationalePair> parse_rationale_response(const std::string& response);

/// Maps a free-form answer onto a binary verdict: 1 = moral/yes, 0 = immoral/no.
/// Scans for the first unambiguous marker among "a)", "b)", standalone "yes",
/// standalone "no" (case-insensitive). Empty optional when no marker is found.
std::optional<int> parse_choice(const std::string& response);

}  // namespace clarity
