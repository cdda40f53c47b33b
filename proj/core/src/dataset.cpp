#include "ebench/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ebench/error.hpp"

namespace ebench {

namespace {

auto
is_blank(std::string_view s) -> bool
{
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

auto
hellaswag_context(std::string_view line, std::size_t line_number) -> std::string
{
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  }
  catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_number) + ": " + e.what(),
                line_number);
  }
  if (!record.is_object() || !record.contains("ctx") ||
      !record["ctx"].is_string()) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_number) +
                    ": missing string field \"ctx\"",
                line_number);
  }
  auto text = record["ctx"].get<std::string>();
  if (is_blank(text)) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_number) + ": empty \"ctx\"",
                line_number);
  }
  return text;
}

}  // namespace

auto
to_string(PromptFormat format) -> std::string_view
{
  switch (format) {
    case PromptFormat::HellaSwagJsonl: return "hellaswag";
    case PromptFormat::PlainLines: return "lines";
  }
  return "hellaswag";
}

auto
parse_prompt_format(std::string_view name) -> PromptFormat
{
  if (name == "hellaswag" || name == "jsonl") {
    return PromptFormat::HellaSwagJsonl;
  }
  if (name == "lines" || name == "plain") {
    return PromptFormat::PlainLines;
  }
  throw Error(ErrorCode::InvalidConfig,
              "unknown dataset format '" + std::string(name) + "'");
}

auto
parse_prompts(std::string_view text, PromptFormat format,
              std::optional<std::size_t> limit) -> std::vector<Prompt>
{
  std::vector<Prompt> prompts;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (limit && prompts.size() >= *limit) {
      break;
    }
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      eol = text.size();
    }
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (is_blank(line)) {
      // Only trailing blank lines are tolerated.
      if (is_blank(text.substr(std::min(pos, text.size())))) {
        break;
      }
      throw Error(ErrorCode::MalformedRecord,
                  "line " + std::to_string(line_number) + ": blank record",
                  line_number);
    }
    Prompt p;
    p.id = prompts.size();
    p.text = format == PromptFormat::HellaSwagJsonl
                 ? hellaswag_context(line, line_number)
                 : std::string(line);
    prompts.push_back(std::move(p));
  }
  if (prompts.empty()) {
    throw Error(ErrorCode::EmptyDataset, "dataset contains no prompts");
  }
  return prompts;
}

auto
load_prompts(const std::filesystem::path& path, PromptFormat format,
             std::optional<std::size_t> limit) -> std::vector<Prompt>
{
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_prompts(buf.str(), format, limit);
}

}  // namespace ebench
