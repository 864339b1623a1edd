#include "storytopics/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>

#include "storytopics/errors.hpp"

namespace storytopics {

namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::vector<std::string> split_tags(std::string_view text) {
  std::vector<std::string> tags;
  while (true) {
    const auto comma = text.find(',');
    const auto piece = trim(text.substr(0, comma));
    if (!piece.empty()) tags.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return tags;
}

}  // namespace

std::string_view to_string(DomainLabel label) {
  switch (label) {
    case DomainLabel::Health: return "Health";
    case DomainLabel::Energy: return "Energy";
    case DomainLabel::Entertainment: return "Entertainment";
    case DomainLabel::Safety: return "Safety";
    case DomainLabel::Other: return "Other";
  }
  return "Other";
}

DomainLabel parse_domain(std::string_view text) {
  const auto value = trim(text);
  for (auto label : kAllDomains) {
    if (iequals(value, to_string(label))) return label;
  }
  return DomainLabel::Other;
}

std::string compose_story_text(std::string_view role, std::string_view feature,
                               std::string_view benefit) {
  std::string text;
  text.reserve(role.size() + feature.size() + benefit.size() + 32);
  text.append("As a ").append(role).append(", I want ").append(feature).append(" so that ").append(benefit);
  return text;
}

Corpus::Corpus(std::vector<UserStory> stories) : stories_(std::move(stories)) {
  for (std::size_t i = 0; i < stories_.size(); ++i) {
    if (!by_id_.emplace(stories_[i].id, i).second) {
      throw DuplicateId("story id " + std::to_string(stories_[i].id) + " appears more than once");
    }
  }
}

std::optional<std::size_t> Corpus::index_of(std::int64_t id) const {
  if (auto it = by_id_.find(id); it != by_id_.end()) return it->second;
  return std::nullopt;
}

std::vector<DomainLabel> Corpus::labels() const {
  std::vector<DomainLabel> out;
  out.reserve(stories_.size());
  for (const auto& s : stories_) out.push_back(s.domain);
  return out;
}

std::vector<std::int64_t> Corpus::ids() const {
  std::vector<std::int64_t> out;
  out.reserve(stories_.size());
  for (const auto& s : stories_) out.push_back(s.id);
  return out;
}

std::vector<CsvRecord> read_csv(std::istream& in) {
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (data.starts_with("\xEF\xBB\xBF")) data.erase(0, 3);

  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  std::size_t line = 1;
  current.line = line;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // Blank lines are not records.
    if (record_has_content) records.push_back(std::move(current));
    current = CsvRecord{};
    record_has_content = false;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw MalformedRow("line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        record_has_content = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < data.size() && data[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        current.line = line;
        break;
      default:
        if (field_was_quoted) {
          throw MalformedRow("line " + std::to_string(line) + ": text after closing quote");
        }
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) {
    throw MalformedRow("line " + std::to_string(current.line) + ": unterminated quoted field");
  }
  if (record_has_content || !field.empty()) end_record();
  return records;
}

Corpus parse_corpus(std::istream& in, const ColumnMapping& mapping) {
  const auto records = read_csv(in);
  if (records.empty()) throw MissingColumn("file has no header row");
  const auto& header = records.front().fields;

  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    if (required) throw MissingColumn(name.empty() ? std::string("<unnamed>") : name);
    return std::nullopt;
  };
  const auto id_col = *column(mapping.id, true);
  const auto role_col = *column(mapping.role, true);
  const auto feature_col = *column(mapping.feature, true);
  const auto benefit_col = *column(mapping.benefit, true);
  const auto domain_col = *column(mapping.domain, true);
  const auto tags_col = mapping.tags.empty() ? std::nullopt : column(mapping.tags, false);

  std::vector<UserStory> stories;
  stories.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw MalformedRow("line " + std::to_string(rec.line) + ": expected " +
                         std::to_string(header.size()) + " fields, found " +
                         std::to_string(rec.fields.size()));
    }
    UserStory story;
    const auto id_text = trim(rec.fields[id_col]);
    const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), story.id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size() || id_text.empty()) {
      throw MalformedRow("line " + std::to_string(rec.line) + ": id '" + std::string(id_text) +
                         "' is not an integer");
    }
    story.role = trim(rec.fields[role_col]);
    story.feature = trim(rec.fields[feature_col]);
    story.benefit = trim(rec.fields[benefit_col]);
    story.domain = parse_domain(rec.fields[domain_col]);
    if (tags_col) story.tags = split_tags(rec.fields[*tags_col]);
    story.full_text = compose_story_text(story.role, story.feature, story.benefit);
    stories.push_back(std::move(story));
  }
  return Corpus(std::move(stories));
}

Corpus load_corpus(const std::filesystem::path& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_corpus(in, mapping);
}

std::map<DomainLabel, std::size_t> domain_histogram(const Corpus& corpus) {
  std::map<DomainLabel, std::size_t> counts;
  for (auto label : kAllDomains) counts[label] = 0;
  for (const auto& s : corpus) ++counts[s.domain];
  return counts;
}

}  // namespace storytopics
