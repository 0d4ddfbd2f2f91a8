#include "vidqual/nn.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace vq::nn {

namespace {

const std::vector<std::string>& special_words() {
  static const std::vector<std::string> specials = {
      "<unk>", "<eos>", "[image]", "[motion]",
      "high", "good", "fair", "poor", "low"};
  return specials;
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '<' ||
         c == '>' || c == '{' || c == '}';
}

}  // namespace

std::vector<std::string> Tokenizer::split_words(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // [image] / [motion] markers survive as whole tokens.
    if (c == '[') {
      for (const char* marker : {"[image]", "[motion]"}) {
        const size_t len = std::string(marker).size();
        if (text.compare(i, len, marker) == 0) {
          out.emplace_back(marker);
          i += len;
          goto next;
        }
      }
    }
    if (word_char(c)) {
      size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      std::string word = text.substr(i, j - i);
      std::transform(word.begin(), word.end(), word.begin(), [](unsigned char ch) {
        return static_cast<char>(std::tolower(ch));
      });
      out.push_back(std::move(word));
      i = j;
    } else {
      out.push_back(std::string(1, c));
      ++i;
    }
  next:;
  }
  return out;
}

Tokenizer Tokenizer::build(const std::vector<std::string>& texts) {
  std::set<std::string> seen(special_words().begin(), special_words().end());
  std::vector<std::string> extra;
  for (const auto& text : texts)
    for (auto& word : split_words(text))
      if (seen.insert(word).second) extra.push_back(std::move(word));
  std::sort(extra.begin(), extra.end());

  std::vector<std::string> words = special_words();
  words.insert(words.end(), extra.begin(), extra.end());
  return from_vocab(std::move(words));
}

Tokenizer Tokenizer::from_vocab(std::vector<std::string> words) {
  require(words.size() >= special_words().size(),
          "tokenizer vocabulary is missing the special tokens");
  for (size_t i = 0; i < special_words().size(); ++i)
    require(words[i] == special_words()[i],
            "tokenizer vocabulary must start with the fixed special tokens");
  Tokenizer t;
  t.words_ = std::move(words);
  for (size_t i = 0; i < t.words_.size(); ++i) {
    require(t.index_.emplace(t.words_[i], static_cast<int>(i)).second,
            "tokenizer vocabulary has a duplicate word: " + t.words_[i]);
  }
  return t;
}

std::vector<int> Tokenizer::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& word : split_words(text)) {
    auto it = index_.find(word);
    ids.push_back(it == index_.end() ? unk_id() : it->second);
  }
  return ids;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == eos_id()) break;
    if (!out.empty()) out += ' ';
    out += word_of(id);
  }
  return out;
}

int Tokenizer::id_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? -1 : it->second;
}

const std::string& Tokenizer::word_of(int id) const {
  require(id >= 0 && id < size(), "tokenizer: token id out of range");
  return words_[id];
}

}  // namespace vq::nn
