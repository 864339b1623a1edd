#include "support.hpp"

#include <fstream>
#include <sstream>

namespace support {

const std::vector<std::vector<std::string>>& domain_words() {
  static const std::vector<std::vector<std::string>> words = {
      {"medicine", "pill", "doctor", "heart", "pulse", "sleep", "diet", "fitness", "blood", "pressure"},
      {"solar", "battery", "power", "electricity", "bill", "heating", "consumption", "grid", "meter", "panel"},
      {"music", "movie", "television", "speaker", "playlist", "game", "party", "stream", "video", "radio"},
      {"lock", "alarm", "camera", "intruder", "smoke", "fire", "window", "sensor", "police", "burglar"},
      {"garden", "plants", "lawn", "pet", "food", "dog", "cat", "groceries", "fridge", "laundry"},
  };
  return words;
}

std::string synthetic_csv(std::size_t per_domain, std::uint64_t seed) {
  static const char* names[] = {"Health", "Energy", "Entertainment", "Safety", "Other"};
  std::mt19937_64 rng(seed);
  const auto& pools = domain_words();
  std::ostringstream out;
  out << "id,role,feature,benefit,domain,tags\n";
  int id = 1;
  for (std::size_t d = 0; d < pools.size(); ++d) {
    std::uniform_int_distribution<std::size_t> pick(0, pools[d].size() - 1);
    for (std::size_t s = 0; s < per_domain; ++s) {
      std::string feature = "to control my";
      for (int w = 0; w < 5; ++w) feature += " " + pools[d][pick(rng)];
      std::string benefit = "I can enjoy";
      for (int w = 0; w < 4; ++w) benefit += " " + pools[d][pick(rng)];
      out << id++ << ",smart home owner," << feature << "," << benefit << "," << names[d] << ",\"home, "
          << names[d] << "\"\n";
    }
  }
  return out.str();
}

storytopics::Corpus synthetic_corpus(std::size_t per_domain, std::uint64_t seed) {
  std::istringstream in(synthetic_csv(per_domain, seed));
  return storytopics::parse_corpus(in);
}

std::vector<storytopics::TokenizedStory> stories(const std::vector<std::vector<std::string>>& docs) {
  std::vector<storytopics::TokenizedStory> out;
  std::int64_t id = 1;
  for (const auto& d : docs) out.push_back({id++, d});
  return out;
}

std::vector<std::vector<std::string>> random_docs(std::mt19937_64& rng, std::size_t count, std::size_t vocab,
                                                  std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::vector<std::vector<std::string>> docs(count);
  for (auto& d : docs) {
    const auto l = len(rng);
    for (std::size_t i = 0; i < l; ++i) d.push_back("w" + std::to_string(word(rng)));
  }
  return docs;
}

storytopics::EmbeddingTable random_table(const std::vector<std::string>& tokens, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  storytopics::EmbeddingTable::Matrix m(static_cast<Eigen::Index>(tokens.size()), dim);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
  return storytopics::EmbeddingTable(tokens, m, storytopics::EmbeddingSource::pretrained);
}

TempDir::TempDir() {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() / ("storytopics-test-" + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace support
