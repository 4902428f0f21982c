#include "modalign/summarizer.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "modalign/error.hpp"

namespace modalign {

SummarizerPrompt summarizer_prompt(const ProteinRecord& record) {
  SummarizerPrompt p;
  p.system =
      "You are a biologist with expertise in protein sequence analysis. \n"
      "Your task is to summarize complex protein sequence data into two or\n"
      "three sentences that highlight key features such as molecute type, \n"
      "chains, structural motifs, organism, etc.";
  p.user = "Summarize the following protein knowledge, start with the sentence: \n"
           "'The protein structure " + record.protein_id + " has a sequence length of: \n" +
           std::to_string(record.sequence_length) + " amino acids.'\n"
           "Here is more information about " + record.protein_id + ": \n" + record.fasta_text;
  return p;
}

RemoteSummarizer::RemoteSummarizer(const std::string& url) {
  static const std::regex re(R"(^http://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) fail(ErrorCode::InvalidConfig, "unsupported summarizer URL: " + url);
  host_ = m[1].str();
  if (m[2].matched) port_ = std::stoi(m[2].str());
  if (m[3].matched) path_ = m[3].str();
}

std::string RemoteSummarizer::summarize(const ProteinRecord& record) const {
  const auto prompt = summarizer_prompt(record);
  const nlohmann::json body = {
      {"system", prompt.system}, {"prompt", prompt.user}, {"protein_id", record.protein_id}};
  httplib::Client client(host_, port_);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) fail(ErrorCode::RemoteFailure, "summarizer request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) fail(ErrorCode::RemoteFailure, "summarizer returned HTTP " + std::to_string(res->status));
  return res->body;
}

std::optional<RemoteSummarizer> summarizer_from_env() {
  const char* url = std::getenv("MODAL_ALIGN_SUMMARIZER_URL");
  if (url == nullptr || *url == '\0') return std::nullopt;
  return RemoteSummarizer(url);
}

}  // namespace modalign
