#pragma once

#include <map>
#include <string>

namespace selfdc {

// Named prompt templates with {slot} placeholders. Defaults ship both
// compiled in and as plain files under prompts/ so the exact wording is
// auditable; a registry loaded from a directory overrides per name.
class PromptRegistry {
 public:
  // Registry pre-populated with the default templates.
  static PromptRegistry defaults();

  // Defaults overridden by any <name>.txt files found in dir.
  static PromptRegistry load(const std::string& dir);

  const std::string& get(const std::string& name) const;
  bool has(const std::string& name) const;
  void set(const std::string& name, std::string text);

  // Substitutes {key} slots; a slot left unfilled is a hard error.
  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& slots) const;

  const std::map<std::string, std::string>& all() const { return templates_; }

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace selfdc
