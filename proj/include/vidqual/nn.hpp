#ifndef VIDQUAL_NN_HPP
#define VIDQUAL_NN_HPP

#include <map>
#include <string>
#include <vector>

#include "vidqual/common.hpp"

namespace vq::nn {

// Word-level tokenizer. Text is lowercased and split on whitespace;
// punctuation characters become single-character tokens so sentence-final
// words stay clean vocabulary entries. The [image] and [motion] markers are
// kept whole as single tokens.
class Tokenizer {
 public:
  // Builds a vocabulary from the given texts. The special tokens <unk>,
  // <eos>, [image], [motion] and the five quality-level words are always
  // present regardless of the corpus.
  static Tokenizer build(const std::vector<std::string>& texts);
  // Restores a tokenizer from a saved vocabulary (checkpoint load).
  static Tokenizer from_vocab(std::vector<std::string> words);

  static std::vector<std::string> split_words(const std::string& text);

  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;

  // -1 when the word is not in the vocabulary.
  int id_of(const std::string& word) const;
  const std::string& word_of(int id) const;

  int size() const { return static_cast<int>(words_.size()); }
  int unk_id() const { return 0; }
  int eos_id() const { return 1; }
  const std::vector<std::string>& vocab() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> index_;
};

}  // namespace vq::nn

#endif  // VIDQUAL_NN_HPP
