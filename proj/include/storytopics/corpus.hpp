#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storytopics {

enum class DomainLabel { Health, Energy, Entertainment, Safety, Other };

inline constexpr std::array<DomainLabel, 5> kAllDomains = {
    DomainLabel::Health, DomainLabel::Energy, DomainLabel::Entertainment, DomainLabel::Safety,
    DomainLabel::Other};

std::string_view to_string(DomainLabel label);

/// Case-insensitive, whitespace-trimmed; anything outside the four named
/// domains is a user-defined sub-domain and lands in Other.
DomainLabel parse_domain(std::string_view text);

struct UserStory {
  std::int64_t id = 0;
  std::string role;
  std::string feature;
  std::string benefit;
  DomainLabel domain = DomainLabel::Other;
  std::vector<std::string> tags;
  std::string full_text;
};

/// "As a {role}, I want {feature} so that {benefit}"
std::string compose_story_text(std::string_view role, std::string_view feature,
                               std::string_view benefit);

/// Header names of the columns to read. The tag column is optional; an empty
/// `tags` ignores it even when present.
struct ColumnMapping {
  std::string id = "id";
  std::string role = "role";
  std::string feature = "feature";
  std::string benefit = "benefit";
  std::string domain = "domain";
  std::string tags = "tags";
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<UserStory> stories);

  std::size_t size() const noexcept { return stories_.size(); }
  bool empty() const noexcept { return stories_.empty(); }
  const UserStory& operator[](std::size_t i) const { return stories_[i]; }
  const std::vector<UserStory>& stories() const noexcept { return stories_; }
  auto begin() const noexcept { return stories_.begin(); }
  auto end() const noexcept { return stories_.end(); }

  /// Position of the story with this id, if present.
  std::optional<std::size_t> index_of(std::int64_t id) const;

  std::vector<DomainLabel> labels() const;
  std::vector<std::int64_t> ids() const;

 private:
  std::vector<UserStory> stories_;
  std::map<std::int64_t, std::size_t> by_id_;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
/// Each record carries the 1-based physical line it started on.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};
std::vector<CsvRecord> read_csv(std::istream& in);

Corpus parse_corpus(std::istream& in, const ColumnMapping& mapping = {});
Corpus load_corpus(const std::filesystem::path& path, const ColumnMapping& mapping = {});

std::map<DomainLabel, std::size_t> domain_histogram(const Corpus& corpus);

}  // namespace storytopics
