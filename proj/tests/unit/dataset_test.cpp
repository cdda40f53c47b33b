#include <gtest/gtest.h>

#include "ebench/dataset.hpp"
#include "ebench/error.hpp"
#include "test_util.hpp"

namespace ebench {
namespace {

TEST(LoadPrompts, HellaSwagFileOrder)
{
  testing::TempDir tmp;
  const auto path = tmp.write("hs.jsonl", testing::hellaswag_lines(3));
  const auto p = load_prompts(path, PromptFormat::HellaSwagJsonl);
  ASSERT_EQ(p.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p[i].id, i);
    EXPECT_EQ(p[i].text, "context " + std::to_string(i) + " of a person who is slicing");
  }
}

TEST(LoadPrompts, LimitTakesPrefix)
{
  testing::TempDir tmp;
  const auto path = tmp.write("hs.jsonl", testing::hellaswag_lines(3));
  const auto p = load_prompts(path, PromptFormat::HellaSwagJsonl, 2);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].id, 0u);
  EXPECT_EQ(p[1].id, 1u);
}

TEST(LoadPrompts, LoadingTwiceIsIdentical)
{
  testing::TempDir tmp;
  const auto path = tmp.write("hs.jsonl", testing::hellaswag_lines(25));
  EXPECT_EQ(load_prompts(path, PromptFormat::HellaSwagJsonl),
            load_prompts(path, PromptFormat::HellaSwagJsonl));
}

TEST(LoadPrompts, PlainLines)
{
  const auto p = parse_prompts("The cat sat\r\nOnce upon a time\n", PromptFormat::PlainLines);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].text, "The cat sat");
  EXPECT_EQ(p[1].text, "Once upon a time");
}

TEST(LoadPrompts, MissingFile)
{
  try {
    load_prompts("/nonexistent/hs.jsonl", PromptFormat::HellaSwagJsonl);
    FAIL();
  }
  catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FileNotFound);
  }
}

TEST(LoadPrompts, MalformedRecordReportsLine)
{
  const std::string text = R"({"ctx": "ok"})" "\n" R"({"label": 1})" "\n";
  try {
    parse_prompts(text, PromptFormat::HellaSwagJsonl);
    FAIL();
  }
  catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_prompts("{\"ctx\": \"a\"}\nnot json\n", PromptFormat::HellaSwagJsonl);
    FAIL();
  }
  catch (const Error& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadPrompts, BlankLineInsideIsAnErrorNotASkip)
{
  try {
    parse_prompts("a\n\nb\n", PromptFormat::PlainLines);
    FAIL();
  }
  catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(parse_prompts("a\nb\n\n\n", PromptFormat::PlainLines).size(), 2u);
}

TEST(LoadPrompts, EmptyDataset)
{
  try {
    parse_prompts("", PromptFormat::PlainLines);
    FAIL();
  }
  catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

TEST(LoadPrompts, FormatNames)
{
  EXPECT_EQ(parse_prompt_format("hellaswag"), PromptFormat::HellaSwagJsonl);
  EXPECT_EQ(parse_prompt_format("lines"), PromptFormat::PlainLines);
  EXPECT_THROW(parse_prompt_format("csv"), Error);
}

}  // namespace
}  // namespace ebench
