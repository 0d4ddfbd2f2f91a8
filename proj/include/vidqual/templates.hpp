#ifndef VIDQUAL_TEMPLATES_HPP
#define VIDQUAL_TEMPLATES_HPP

#include <string>

// Prompt templates of record. The strings here are the canonical copies;
// tests compare them byte-for-byte against the golden files under
// tests/golden/. [image] and [motion] stay as symbolic markers that the
// model core resolves when building the interleaved sequence.
namespace vq::templates {

enum class SystemPromptMode { Train, Score, Understand };

// Raw templates with [length] / [num frames] / [image] / [motion] slots.
const std::string& system_prompt_template(SystemPromptMode mode);

// Substitutes [length] and [num frames]; [image]/[motion] are left intact.
std::string render_system_prompt(SystemPromptMode mode, double duration_s,
                                 double frame_rate);

// GPT-extension prompt templates, each with one [overall depiction] slot.
const std::string& quality_centric_template();   // asks for 3 Q&A pairs
const std::string& temporal_centric_template();  // asks for 1 pair
const std::string& extended_conversation_template();
// Rewrite template used for both in-context depictions and human-annotated
// extended conversations; [depiction] slot.
const std::string& rewrite_template();

// Replaces every occurrence of `slot` in `tpl` with `value`.
std::string substitute(const std::string& tpl, const std::string& slot,
                       const std::string& value);

// Stage question/answer templates (format of record for this repository).
const std::string& stage1_question_template();  // {media} {kind} {options}
const std::string& stage1_answer_template();    // {media} {kind} {labels}
const std::string& stage1_no_distortion_answer_template();  // {media}
const std::string& stage2_question();
const std::string& stage2_answer_template();  // {LEVEL}
const std::string& streaming_binary_preamble_template();   // {sequence}
const std::string& streaming_summary_preamble_template();  // five slots
const std::string& causal_question();

}  // namespace vq::templates

#endif  // VIDQUAL_TEMPLATES_HPP
