#include "modalign/protein_meta.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "modalign/error.hpp"

namespace modalign {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string letter_name(std::size_t index) {
  if (index < 26) return std::string(1, static_cast<char>('A' + index));
  return "A" + std::to_string(index + 1);
}

struct Entry {
  std::string id;
  std::vector<std::string> chains;  // empty: assign positional names later
  std::string molecule;
  std::string organism;
  std::string header;
  std::int64_t residues = 0;
};

const std::regex& entity_header() {
  static const std::regex re(R"(^([A-Za-z0-9]+)_([A-Za-z0-9]+)\|Chains?\s+([^|]*)\|([^|]*)\|(.*)$)");
  return re;
}

const std::regex& seqres_header() {
  static const std::regex re(R"(^([A-Za-z0-9]+)_(\S+)\s+mol:(\S+)\s+length:(\d+)\s*(.*)$)");
  return re;
}

const std::regex& taxid_suffix() {
  static const std::regex re(R"(\s*\(\d+\)\s*$)");
  return re;
}

const std::regex& organism_brackets() {
  static const std::regex re(R"(^(.*?)\s*\[([^\[\]]+)\]\s*$)");
  return re;
}

std::vector<std::string> split_chain_list(const std::string& text) {
  std::vector<std::string> chains;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string chain = trim(item);
    // "A[auth C]": keep the label_asym chain name
    if (auto bracket = chain.find('['); bracket != std::string::npos) chain = trim(chain.substr(0, bracket));
    if (!chain.empty()) chains.push_back(std::move(chain));
  }
  return chains;
}

Entry parse_header(const std::string& line) {
  const std::string body = trim(std::string_view(line).substr(1));
  Entry e;
  e.header = line;
  std::smatch m;
  if (std::regex_match(body, m, entity_header())) {
    e.id = upper(m[1].str());
    e.chains = split_chain_list(m[3].str());
    e.molecule = trim(m[4].str());
    e.organism = trim(std::regex_replace(m[5].str(), taxid_suffix(), ""));
    if (e.chains.empty()) fail(ErrorCode::MalformedHeader, "no chains in header: " + line);
    return e;
  }
  if (std::regex_match(body, m, seqres_header())) {
    e.id = upper(m[1].str());
    e.chains = {m[2].str()};
    std::string rest = trim(m[5].str());
    std::smatch org;
    if (std::regex_match(rest, org, organism_brackets())) {
      e.molecule = trim(org[1].str());
      e.organism = trim(org[2].str());
    } else {
      e.molecule = rest;
      e.organism = "unknown";
    }
    return e;
  }
  const auto space = body.find_first_of(" \t");
  e.id = body.substr(0, space);
  if (e.id.empty()) fail(ErrorCode::MalformedHeader, "header without protein ID: " + line);
  e.molecule = space == std::string::npos ? std::string() : trim(body.substr(space));
  e.organism = "unknown";
  return e;
}

void append_distinct(std::string& joined, std::vector<std::string>& seen, const std::string& value) {
  if (value.empty() || std::find(seen.begin(), seen.end(), value) != seen.end()) return;
  if (!joined.empty()) joined += "; ";
  joined += value;
  seen.push_back(value);
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string clean_name(std::string_view raw) {
  static const std::regex numeric_group(R"(\(\s*\d+\s*\))");
  std::string lowered(raw);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return collapse_whitespace(std::regex_replace(lowered, numeric_group, " "));
}

}  // namespace

std::vector<ProteinRecord> parse_fasta(std::string_view content) {
  std::vector<Entry> entries;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '>') {
      entries.push_back(parse_header(line));
      continue;
    }
    if (entries.empty()) continue;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) ++entries.back().residues;
    }
  }
  if (entries.empty()) fail(ErrorCode::NoRecords, "no FASTA header lines found");

  std::vector<ProteinRecord> records;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<std::string>> seen_molecules, seen_organisms;
  for (auto& e : entries) {
    auto [it, inserted] = slot.try_emplace(e.id, records.size());
    if (inserted) {
      ProteinRecord r;
      r.protein_id = e.id;
      records.push_back(std::move(r));
      seen_molecules.emplace_back();
      seen_organisms.emplace_back();
    }
    const std::size_t k = it->second;
    auto& rec = records[k];
    if (e.chains.empty()) e.chains = {letter_name(rec.chains.size())};
    for (auto& c : e.chains) rec.chains.push_back(c);
    rec.sequence_length += e.residues * static_cast<std::int64_t>(e.chains.size());
    append_distinct(rec.molecule_name, seen_molecules[k], e.molecule);
    append_distinct(rec.organism, seen_organisms[k], e.organism);
    rec.fasta_text += e.header;
    rec.fasta_text += '\n';
  }
  return records;
}

std::string describe_protein(const ProteinRecord& record) {
  std::string chains;
  for (std::size_t i = 0; i < record.chains.size(); ++i) {
    if (i > 0) chains += ", ";
    chains += record.chains[i];
  }
  std::ostringstream out;
  out << "The protein structure " << record.protein_id << " has a sequence length of "
      << record.sequence_length << " amino acids. Here is more information: The protein structure "
      << record.protein_id << " involves the following chains: " << chains
      << ". The protein is named " << record.molecule_name << " and is derived from the organism "
      << record.organism << ".";
  return out.str();
}

std::string category_label(std::string_view molecule, std::string_view organism) {
  return clean_name(molecule) + ", " + clean_name(organism);
}

std::string_view to_string(Rarity r) noexcept {
  switch (r) {
    case Rarity::Rare: return "rare";
    case Rarity::Popular: return "popular";
    case Rarity::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

RarityTable rank_rarity(const std::vector<ProteinRecord>& records, std::size_t top_n) {
  if (records.empty()) fail(ErrorCode::EmptyInput, "no protein records to rank");
  RarityTable table;
  for (const auto& r : records) {
    std::string label = category_label(r.molecule_name, r.organism);
    table.category_of[r.protein_id] = label;
    table.label_of[r.protein_id] = Rarity::Unlabeled;
    if (label == kUnlabeledCategory) continue;
    auto& entry = table.categories[label];
    ++entry.count;
    entry.members.push_back(r.protein_id);
  }
  for (const auto& [label, entry] : table.categories) table.ranked.push_back(label);
  // map iteration is label-ordered, so a stable sort on count gives (count, label)
  std::stable_sort(table.ranked.begin(), table.ranked.end(), [&](const auto& a, const auto& b) {
    return table.categories.at(a).count < table.categories.at(b).count;
  });

  const std::size_t n = table.ranked.size();
  const std::size_t rare_end = std::min(top_n, n);
  const std::size_t popular_begin = n - std::min(top_n, n);
  for (std::size_t i = popular_begin; i < n; ++i) {
    for (const auto& id : table.categories.at(table.ranked[i]).members) table.label_of[id] = Rarity::Popular;
  }
  for (std::size_t i = 0; i < rare_end; ++i) {
    for (const auto& id : table.categories.at(table.ranked[i]).members) table.label_of[id] = Rarity::Rare;
  }
  return table;
}

}  // namespace modalign
