#pragma once

#include <optional>
#include <string>

#include "modalign/protein_meta.hpp"

namespace modalign {

struct SummarizerPrompt {
  std::string system;
  std::string user;
};

/// Prompt pair asking a chat model to summarise a multi-chain FASTA entry.
SummarizerPrompt summarizer_prompt(const ProteinRecord& record);

/// Client for an optional description service. POSTs
/// {"system": ..., "prompt": ..., "protein_id": ...} as JSON to the
/// configured URL and returns the response body verbatim.
class RemoteSummarizer {
 public:
  /// `url` is http://host[:port][/path]. Throws InvalidConfig otherwise.
  explicit RemoteSummarizer(const std::string& url);

  std::string summarize(const ProteinRecord& record) const;

  const std::string& host() const noexcept { return host_; }
  int port() const noexcept { return port_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string host_;
  int port_ = 80;
  std::string path_ = "/";
};

/// Built from MODAL_ALIGN_SUMMARIZER_URL when it is set and non-empty.
std::optional<RemoteSummarizer> summarizer_from_env();

}  // namespace modalign
