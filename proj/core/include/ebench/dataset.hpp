#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ebench {

/// An incomplete phrase handed to the model. `id` is the 0-based record
/// index in the source file.
struct Prompt {
  std::size_t id = 0;
  std::string text;

  friend auto operator==(const Prompt&, const Prompt&) -> bool = default;
};

enum class PromptFormat { HellaSwagJsonl, PlainLines };

auto to_string(PromptFormat format) -> std::string_view;
auto parse_prompt_format(std::string_view name) -> PromptFormat;

/// Loads prompts in file order. HellaSwag records contribute their "ctx"
/// field. A bad line aborts the whole load with MalformedRecord carrying the
/// 1-based line number; nothing is ever skipped.
auto load_prompts(const std::filesystem::path& path, PromptFormat format,
                  std::optional<std::size_t> limit = std::nullopt)
    -> std::vector<Prompt>;

/// Same rules as load_prompts, over in-memory text.
auto parse_prompts(std::string_view text, PromptFormat format,
                   std::optional<std::size_t> limit = std::nullopt)
    -> std::vector<Prompt>;

}  // namespace ebench
