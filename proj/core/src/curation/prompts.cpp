#include "lirlab/curation/prompts.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "lirlab/error.hpp"

namespace lirlab::curation {

namespace {

constexpr const char* kCaptionText =
    "# Task Description\n"
    "You are an expert in image analysis and description. Your job is to generate one precise and concise "
    "sentence that fully describes the content of the given image. Focus on the most important details, such as:\n"
    "- The primary objects or elements in the image.\n"
    "- The relationships, positions, or actions of these objects.\n"
    "- The overall setting, background, or scene type.\n"
    "\n"
    "Provide the modification text in one clear and concise sentence without any explanation or additional "
    "context.\n";

constexpr const char* kModificationChanges =
    "The modification may involve:\n"
    "- Adjusting the color, shape, size, quantity, or texture of objects.\n"
    "- Changing the position, angle, or arrangement of objects.\n"
    "- Changing the position, angle, or arrangement of objects.\n"
    "- Modifying the background.\n"
    "\n"
    "Instructions:\n"
    "- Provide only the modification instruction as a direct command.\n"
    "- Do not include explanations, reasoning, or comparisons to the original or target images.\n"
    "- Ensure the instruction is specific, actionable, and focused.\n";

const std::string& modification_text() {
  static const std::string text =
      std::string("# Task Description\n"
                  "You are an expert in image understanding and modification. Given image 1 with the caption "
                  "\"{cap1}\" and image 2 with the caption \"{cap2}\", your task is to generate a clear and "
                  "concise modification instruction that, when applied to image 1, will make it visually "
                  "resemble image 2.\n"
                  "\n") +
      kModificationChanges;
  return text;
}

const std::string& direct_text() {
  static const std::string text =
      std::string("# Task Description\n"
                  "You are an expert in image understanding and modification. Given image 1 and image 2, your "
                  "task is to generate a clear and concise modification instruction that, when applied to "
                  "image 1, will make it visually resemble image 2.\n"
                  "\n") +
      kModificationChanges;
  return text;
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Placeholder names in order of appearance.
std::vector<std::string> placeholders(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' || i + 1 >= text.size() || !is_ident_start(text[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_ident(text[j])) ++j;
    if (j < text.size() && text[j] == '}') {
      out.push_back(text.substr(i + 1, j - i - 1));
      i = j;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(TemplateName name) noexcept {
  switch (name) {
    case TemplateName::caption: return "P_c";
    case TemplateName::modification: return "P_m";
    case TemplateName::modification_direct: return "P_m_direct";
  }
  return "?";
}

TemplateName template_name_from_string(std::string_view s) {
  if (s == "P_c") return TemplateName::caption;
  if (s == "P_m") return TemplateName::modification;
  if (s == "P_m_direct") return TemplateName::modification_direct;
  raise(ErrorCode::TemplateError, "unknown template name '" + std::string(s) + "'");
}

PromptTemplate default_template(TemplateName name) {
  switch (name) {
    case TemplateName::caption: return {name, kCaptionText};
    case TemplateName::modification: return {name, modification_text()};
    case TemplateName::modification_direct: return {name, direct_text()};
  }
  raise(ErrorCode::TemplateError, "unknown template");
}

void validate_template(const PromptTemplate& tpl) {
  std::map<std::string, int> counts;
  for (const auto& p : placeholders(tpl.text)) ++counts[p];
  const std::string label(to_string(tpl.name));
  if (tpl.name == TemplateName::modification) {
    for (const char* key : {"cap1", "cap2"}) {
      if (counts[key] != 1) {
        raise(ErrorCode::TemplateError,
              label + " must contain {" + key + "} exactly once, found " + std::to_string(counts[key]));
      }
    }
    for (const auto& [k, c] : counts) {
      if (c > 0 && k != "cap1" && k != "cap2") raise(ErrorCode::TemplateError, label + " has unknown placeholder {" + k + "}");
    }
  } else if (!counts.empty()) {
    raise(ErrorCode::TemplateError, label + " must not contain placeholders, found {" + counts.begin()->first + "}");
  }
}

PromptTemplate load_template(TemplateName name, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open template '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  PromptTemplate tpl{name, ss.str()};
  validate_template(tpl);
  return tpl;
}

std::string render(const PromptTemplate& tpl, const std::vector<std::pair<std::string, std::string>>& values) {
  std::map<std::string, std::pair<const std::string*, int>> lookup;
  for (const auto& [k, v] : values) lookup[k] = {&v, 0};

  const std::string& text = tpl.text;
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{' && i + 1 < text.size() && is_ident_start(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident(text[j])) ++j;
      if (j < text.size() && text[j] == '}') {
        const auto key = text.substr(i + 1, j - i - 1);
        auto it = lookup.find(key);
        if (it == lookup.end()) {
          raise(ErrorCode::TemplateError, std::string(to_string(tpl.name)) + ": unfilled placeholder {" + key + "}");
        }
        out += *it->second.first;
        ++it->second.second;
        i = j;
        continue;
      }
    }
    out += text[i];
  }
  for (const auto& [k, entry] : lookup) {
    if (entry.second != 1) {
      raise(ErrorCode::TemplateError, std::string(to_string(tpl.name)) + ": placeholder {" + k + "} occurs " +
                                          std::to_string(entry.second) + " times, expected once");
    }
  }
  return out;
}

}  // namespace lirlab::curation
