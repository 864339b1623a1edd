#pragma once

#include <stdexcept>
#include <string>

namespace storytopics {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorCategory { config, data, numeric, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string name, const std::string& what)
      : std::runtime_error(what), category_(category), name_(std::move(name)), detail_(what) {
    refresh();
  }

  const char* what() const noexcept override { return message_.c_str(); }
  ErrorCategory category() const noexcept { return category_; }
  /// Short error kind, e.g. "MissingColumn".
  const std::string& name() const noexcept { return name_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }
  /// Prepends context such as the failing stage, keeping the dynamic type.
  void add_context(const std::string& context) {
    detail_ = context + ": " + detail_;
    refresh();
  }

 private:
  void refresh() { message_ = name_ + ": " + detail_; }

  ErrorCategory category_;
  std::string name_;
  std::string detail_;
  std::string message_;
};

#define STORYTOPICS_DEFINE_ERROR(Type, Category)                                 \
  class Type : public Error {                                                    \
   public:                                                                       \
    explicit Type(const std::string& what) : Error(ErrorCategory::Category, #Type, what) {} \
  };

// corpus
STORYTOPICS_DEFINE_ERROR(MissingColumn, data)
STORYTOPICS_DEFINE_ERROR(MalformedRow, data)
STORYTOPICS_DEFINE_ERROR(DuplicateId, data)
// lda / embed
STORYTOPICS_DEFINE_ERROR(EmptyCorpus, data)
STORYTOPICS_DEFINE_ERROR(AllEmptyDocuments, data)
STORYTOPICS_DEFINE_ERROR(NoTokenMeetsMinCount, data)
STORYTOPICS_DEFINE_ERROR(MalformedHeader, data)
STORYTOPICS_DEFINE_ERROR(TruncatedFile, data)
STORYTOPICS_DEFINE_ERROR(NonUtf8Token, data)
// docgeom / wmd
STORYTOPICS_DEFINE_ERROR(AllEmpty, data)
STORYTOPICS_DEFINE_ERROR(ShapeMismatch, data)
STORYTOPICS_DEFINE_ERROR(EmptyDocument, data)
// project / evalcluster
STORYTOPICS_DEFINE_ERROR(PerplexityTooLarge, config)
STORYTOPICS_DEFINE_ERROR(NonFiniteInput, numeric)
STORYTOPICS_DEFINE_ERROR(KTooLarge, config)
STORYTOPICS_DEFINE_ERROR(UnknownStory, data)
STORYTOPICS_DEFINE_ERROR(InvalidDistanceMatrix, data)
// plumbing
STORYTOPICS_DEFINE_ERROR(ConfigError, config)
STORYTOPICS_DEFINE_ERROR(IoError, io)
STORYTOPICS_DEFINE_ERROR(FormatError, data)

#undef STORYTOPICS_DEFINE_ERROR

}  // namespace storytopics
