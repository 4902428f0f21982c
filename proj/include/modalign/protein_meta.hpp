#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace modalign {

struct ProteinRecord {
  std::string protein_id;
  std::vector<std::string> chains;
  std::string molecule_name;
  std::string organism;
  /// Total residues across all chains.
  std::int64_t sequence_length = 0;
  /// Raw header lines, kept for the remote summarizer prompt.
  std::string fasta_text;
};

/// Parses FASTA text into one record per protein ID, grouping chains.
///
/// Recognised header grammars, tried in order:
///   RCSB entity:  >3PYK_1|Chains A, B[auth C]|Molecule name|Organism (9606)
///   RCSB seqres:  >3pyk_A mol:protein length:260  MOLECULE NAME [Organism]
///   fallback:     >ID free text   (molecule = free text, organism "unknown")
///
/// In the entity grammar one sequence is shared by every listed chain, so it
/// counts once per chain toward sequence_length. Throws NoRecords when there
/// is no header line and MalformedHeader when a header has no ID.
std::vector<ProteinRecord> parse_fasta(std::string_view content);

/// Renders the fixed natural-language description used as the text-modality
/// input.
std::string describe_protein(const ProteinRecord& record);

/// Cleaned "molecule, organism" category: lowercased, numeric parenthesised
/// groups removed, whitespace collapsed.
std::string category_label(std::string_view molecule, std::string_view organism);

/// Label produced when both parts clean to nothing.
inline constexpr std::string_view kUnlabeledCategory = ", ";

enum class Rarity { Rare, Popular, Unlabeled };

std::string_view to_string(Rarity r) noexcept;

struct CategoryEntry {
  std::int64_t count = 0;
  std::vector<std::string> members;
};

struct RarityTable {
  std::map<std::string, CategoryEntry> categories;
  /// Categories ascending by (count, label).
  std::vector<std::string> ranked;
  std::map<std::string, Rarity> label_of;
  std::map<std::string, std::string> category_of;
};

/// Counts categories, ranks ascending by (count, label), marks members of the
/// first top_n categories rare and of the last top_n popular. Rare wins when
/// the two ranges overlap.
RarityTable rank_rarity(const std::vector<ProteinRecord>& records, std::size_t top_n = 100);

}  // namespace modalign
