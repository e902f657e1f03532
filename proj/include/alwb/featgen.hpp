#pragma once

// Hand-crafted feature groups A (lexical/orthographic/context), B (POS) and
// C (semantic lexicon), and assembly of complete per-token feature sets.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alwb/corpus.hpp"
#include "alwb/unsup.hpp"

namespace alwb {

/// Per-token feature strings. Presence means value 1.
using FeatureVector = std::vector<std::vector<std::string>>;

class Lexicon {
 public:
  Lexicon() = default;

  /// Adds a term given as space-separated tokens; tokens are normalized.
  /// The first tag recorded for a term wins.
  void add(std::string_view term, std::string_view group);

  /// Group tag for an exact normalized token sequence.
  std::optional<std::string> find(const std::vector<std::string>& normalized) const;

  std::size_t max_len() const { return max_len_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::vector<std::string>, std::string> entries_;
  std::size_t max_len_ = 0;
};

/// One "term<TAB>group" entry per line. Blank lines and '#' comments skipped.
Lexicon read_lexicon(std::istream& in);
Lexicon read_lexicon_file(const std::string& path);

struct SemanticTag {
  std::optional<std::string> group;
  int length = 0;

  bool operator==(const SemanticTag&) const = default;
};

/// Greedy left-to-right longest match over normalized tokens.
std::vector<SemanticTag> semantic_spans(const Sentence& sentence, const Lexicon& lexicon);

struct FeatureGroupConfig {
  std::string letters = "ABC";
  int window = 2;
  int max_affix = 4;

  bool enabled(char letter) const { return letters.find(letter) != std::string::npos; }
};

/// Word-shape pattern: upper-case letters -> X, lower -> x, digits -> 0.
std::string word_shape(std::string_view surface);

FeatureVector emit_group_A(const Sentence& sentence, const FeatureGroupConfig& cfg);
/// Empty sets when any token lacks a POS tag.
FeatureVector emit_group_B(const Sentence& sentence, const FeatureGroupConfig& cfg);
FeatureVector emit_group_C(const Sentence& sentence, const Lexicon& lexicon, const FeatureGroupConfig& cfg);

/// Union of the enabled groups per token, deduplicated and sorted.
/// `unsup` may be null when no unsupervised letter is enabled.
FeatureVector assemble(const Sentence& sentence, const FeatureGroupConfig& cfg, const Lexicon* lexicon,
                       const UnsupResources* unsup, const UnsupFeatureConfig& unsup_cfg = UnsupFeatureConfig::defaults());

}  // namespace alwb
