#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "backend.hpp"
#include "prompts.hpp"
#include "types.hpp"

namespace selfdc {

struct UnknownEvent {
  std::string text;
  std::string event_date;  // ISO yyyy-mm-dd, must be after the cutoff
  std::string source;
};

enum class PairBranch { AAB, ABC };

struct GeneratedPair {
  std::string merged_question;
  std::string answer;
  std::string unknown_question;
  std::string known_question;
  PairBranch branch = PairBranch::AAB;
  std::vector<std::string> entities;
  std::map<std::string, std::string> intermediates;
};

// Deterministic per-event RNG stream derived from (seed, event index) so
// parallel generation cannot change outputs. Draws use the generator output
// directly rather than std::uniform_int_distribution, which is not
// specified bit-exactly across standard libraries.
class EventRng {
 public:
  EventRng(std::int64_t seed, std::size_t event_index);
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

 private:
  std::uint64_t state_;
};

// Events file: one event per line, either "ISO-DATE<TAB>text" or a JSON
// object {"text", "date", "source"?}.
std::vector<UnknownEvent> load_events(const std::string& path,
                                      const std::string& cutoff_date);

// Prompts the backend for a delimiter-separated named-entity list;
// deduplicated, order-preserving. Throws EmptyEntityList when nothing
// parses.
std::vector<std::string> get_entities(Backend& backend,
                                      const PromptRegistry& prompts,
                                      const std::string& event_text);

// One synthesis pass over an event: sample the answer entity, generate the
// unknown question, generate known events, branch on a uniform draw in
// [1,9] (< 5 takes the direct known-question branch), and merge. All
// intermediate completions are recorded.
GeneratedPair generate_pair(Backend& backend, const PromptRegistry& prompts,
                            const UnknownEvent& event, EventRng& rng);

// Format QC: non-empty fields, trailing '?', no unfilled template residue,
// answer consistent with the branch rule. Violations are data, not errors.
std::vector<std::string> validate_record(const GeneratedPair& pair);

// Converts a pair into a dataset record with provenance metadata.
DatasetRecord to_dataset_record(const GeneratedPair& pair,
                                const UnknownEvent& event, std::size_t index);

// Full pipeline over an events file. Pairs failing validation are skipped.
std::vector<DatasetRecord> generate_dataset(Backend& backend,
                                            const PromptRegistry& prompts,
                                            const std::vector<UnknownEvent>& events,
                                            std::int64_t seed);

// Merges two generated records into one hard record via the merge prompt;
// both source pairs travel in meta.
DatasetRecord merge_hard(Backend& backend, const PromptRegistry& prompts,
                         const DatasetRecord& first,
                         const DatasetRecord& second, std::size_t index);

// Review-file export/import: tab-separated id / accept / question / answer.
void export_review(const std::vector<DatasetRecord>& records,
                   const std::string& path);
std::vector<DatasetRecord> apply_review(
    const std::vector<DatasetRecord>& records, const std::string& review_path);

std::string to_string(PairBranch b);

}  // namespace selfdc
