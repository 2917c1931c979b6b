#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lirlab::curation {

enum class TemplateName {
  caption,              // P_c
  modification,         // P_m, needs {cap1} and {cap2}
  modification_direct,  // P_m_direct
};

std::string_view to_string(TemplateName name) noexcept;
TemplateName template_name_from_string(std::string_view s);

struct PromptTemplate {
  TemplateName name;
  std::string text;
};

/// Built-in prompt texts.
PromptTemplate default_template(TemplateName name);

/// Reads a template body from a UTF-8 file and validates its placeholders.
PromptTemplate load_template(TemplateName name, const std::filesystem::path& path);

/// Throws TemplateError unless P_m holds {cap1} and {cap2} exactly once each
/// and P_c / P_m_direct hold no placeholder.
void validate_template(const PromptTemplate& tpl);

/// Substitutes `{key}` placeholders in a single pass, so substituted values
/// are never re-scanned. Every key must occur exactly once and no other
/// placeholder may remain; violations raise TemplateError.
std::string render(const PromptTemplate& tpl, const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace lirlab::curation
