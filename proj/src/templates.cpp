#include "vidqual/templates.hpp"

#include <cmath>

#include "vidqual/common.hpp"

namespace vq::templates {

namespace {

const std::string kTrainSystemPrompt =
    "Now you will receive one video. This video is [length] seconds long, and "
    "you will see a sequence of keyframes generated by uniformly sampling 1 "
    "frame per second from the video. The keyframe sequence follows the "
    "original order of the video. After uniform sampling, there are a total of "
    "[length] images: [image]. In addition, you will also obtain motion "
    "features extracted from all [num frames] frames of the entire video: "
    "[motion]. The temporal motion features also follow the original frame "
    "order of the video. Please watch this video carefully, and then answer "
    "the following question.";

const std::string kScoreSystemPrompt =
    "The key frames of this video are: [image]. And the motion feature of the "
    "video is [motion]. Please watch this video carefully, and then answer "
    "the following question.";

const std::string kUnderstandSystemPrompt =
    "You will receive [length] distinct frames that have been uniformly "
    "sampled in each second from a video frames sequence, arranged in the "
    "same temporal order as they appear in the video. In addition, you will "
    "also obtain motion features extracted from all [num frames] frames of "
    "the video. Please analyze these images and motion features and answer "
    "the question based on your observations. The video frames: [image], the "
    "motion features [motion].";

const std::string kQualityCentricPrompt =
    "You will receive a detailed depiction of the quality of a video, which "
    "may include evaluations and comments on various attributes of the "
    "video's quality. Based on this depiction, create exactly 3 questions "
    "about specific video quality attributes (sharpness, fluency, flicker, "
    "etc.) and provide the corresponding answers. The questions and answers "
    "can be in the form of yes/no choices (e.g., Question: Is the sharpness "
    "of the video high throughout the playback? A. Yes B. No Answer: A.), "
    "multi-choices (single answer) questions (e.g., Question: How is the "
    "degree of the sharpness of the video throughout the playback? A. High "
    "B. Relatively good C. Relatively poor D. Extremely low. Answer: B.) or "
    "open-ended responses (e.g., Question: How would you rate the sharpness "
    "of the video throughout playback? Answer: Average/Excellent/Poor). "
    "Please ensure that the questions and answers are entirely based on the "
    "video quality depiction without including any information beyond it. "
    "Please note that you will not see the video; only the textual depiction "
    "will be provided. Therefore, all questions and answers must strictly "
    "adhere to the depiction, and no information beyond what is described "
    "should be included. Please format the output as follows: Question 1: "
    "Question: Answer: Question 2: Question: Answer: Question 3: Question: "
    "Answer:. The video quality depiction is: [overall depiction]. You need "
    "to simulate as if you have seen the video; therefore, all questions and "
    "answers should not include any traces of the provided text depiction.";

const std::string kTemporalCentricPrompt =
    "You will receive a detailed depiction of the quality of a video, which "
    "may include evaluations and comments on various attributes of the video "
    "quality. Based on this depiction, create a question related to the "
    "temporal aspect of the video and provide the corresponding answer. The "
    "question types include: 1. Temporal analysis, which is about and "
    "answers the relationship between the quality of two different time "
    "points or segments within the video. 2. Temporal retrieval, which is "
    "about when a quality event occurs in the video or how frequently it "
    "appears. Please note that you will not see the video itself but only "
    "the text depiction provided, so all questions and answers must strictly "
    "adhere to the depiction. If the description does not include relevant "
    "information, such information should not appear in the questions or "
    "answers you design. You may design questions through single-answer "
    "choices or open-ended responses. Please format the output as follows: "
    "Question: Answer:. The video quality depiction is: [overall depiction]. "
    "You need to simulate as if you have seen the video; therefore, all "
    "questions and answers should not include any traces of the provided "
    "text depiction.";

const std::string kExtendedConversationPrompt =
    "You will receive a detailed depiction of the quality of a video, which "
    "may include evaluations and comments on various attributes of the video "
    "quality. Based on this depiction, create only 1 extended question and "
    "provide an answer. The question types include but are not limited to: "
    "1. Requesting an inference about the reason for a particular quality "
    "attribute (positive or negative) observed in the video. 2. Requesting a "
    "specific post-processing method that can improve the quality of a "
    "distorted video based on the negative attributes described. 3. "
    "Requesting a specific strategy for re-shooting the video to achieve a "
    "higher quality version of the same content based on the negative "
    "aspects described. Please note that you will not see the video; only "
    "the textual depiction will be provided. Therefore, all questions and "
    "answers must strictly adhere to the content of the depiction. If the "
    "depiction explicitly states the cause of a quality event, questions of "
    "type 1 must strictly follow the reason given in the depiction. If no "
    "explicit cause is stated in the depiction, do not design type 1 "
    "questions. Please format the output as follows: Question: Answer:. The "
    "video quality depiction is: [overall depiction]. You need to simulate "
    "as if you have seen the video; therefore, all questions and answers "
    "should not include any traces of the provided text depiction.";

const std::string kRewritePrompt =
    "You will receive one brief in-context quality depiction, which "
    "primarily describes a positive or negative quality phenomenon occurring "
    "in a specific moment or period of a video or space within the frames. "
    "Based on this depiction, please rewrite only 1 question. Requirements: "
    "If the in-context quality description targets a specific moment or "
    "period in the video or a particular object/part of the frame space (or "
    "a combination of both), the rewritten question must focus on that "
    "specific time or spatial part/object stated in the depiction. Please "
    "note that you will not see the video but only the textual depiction "
    "provided. Therefore, all questions and answers must strictly adhere to "
    "the depiction, and no information beyond what is described should be "
    "included in the questions and answers. Please format the output as "
    "follows: Question: Answer:. The depiction is: [depiction]. You need to "
    "simulate as if you have seen the video; therefore, all questions and "
    "answers should not include any traces of the provided text depiction.";

const std::string kStage1Question =
    "Observe the {media} carefully. Which of the following {kind} "
    "distortions are present in the {media}? Candidate distortions: "
    "{options}. List every distortion that is present, or state that there "
    "is no salient distortion.";

const std::string kStage1Answer =
    "The {media} contains the following {kind} distortions: {labels}.";

const std::string kStage1NoDistortionAnswer =
    "There is no salient distortion in the {media}.";

const std::string kStage2Question =
    "Please watch the video and assess its overall visual quality. How would "
    "you rate the quality of this video?";

const std::string kStage2Answer = "The quality of the video is {LEVEL}.";

const std::string kStreamingBinaryPreamble =
    "The playback stalling record of this video is given as a 0/1 sequence "
    "with one digit per frame, where 1 represents stalling and 0 represents "
    "smooth playback: {sequence}. ";

const std::string kStreamingSummaryPreamble =
    "Stalling information of this video: the total number of stalling events "
    "is {count}; the duration of each stalling event is {durations}; the "
    "proportion of stalling events duration to the total video length is "
    "{ratio}; the initial buffering time is {initial} seconds; the time "
    "elapsed between the end of the last stalling event and the end of the "
    "playback is {tail} seconds. ";

const std::string kCausalQuestion =
    "Please watch the video and assess its overall visual quality. How would "
    "you rate the quality of this video? Please also explain the reasons for "
    "your rating.";

}  // namespace

const std::string& system_prompt_template(SystemPromptMode mode) {
  switch (mode) {
    case SystemPromptMode::Train:
      return kTrainSystemPrompt;
    case SystemPromptMode::Score:
      return kScoreSystemPrompt;
    case SystemPromptMode::Understand:
      return kUnderstandSystemPrompt;
  }
  fail("system_prompt_template: invalid mode");
}

std::string substitute(const std::string& tpl, const std::string& slot,
                       const std::string& value) {
  std::string out = tpl;
  size_t pos = 0;
  while ((pos = out.find(slot, pos)) != std::string::npos) {
    out.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return out;
}

std::string render_system_prompt(SystemPromptMode mode, double duration_s,
                                 double frame_rate) {
  require(duration_s > 0.0, "render_system_prompt: missing or non-positive duration");
  require(frame_rate > 0.0, "render_system_prompt: frame_rate must be > 0");
  // Keyframes are sampled at 1 fps, so [length] is the whole-second count.
  const long seconds = std::lround(duration_s);
  const long frames = std::lround(duration_s * frame_rate);
  std::string out = system_prompt_template(mode);
  out = substitute(out, "[length]", std::to_string(seconds));
  out = substitute(out, "[num frames]", std::to_string(frames));
  return out;
}

const std::string& quality_centric_template() { return kQualityCentricPrompt; }
const std::string& temporal_centric_template() { return kTemporalCentricPrompt; }
const std::string& extended_conversation_template() {
  return kExtendedConversationPrompt;
}
const std::string& rewrite_template() { return kRewritePrompt; }

const std::string& stage1_question_template() { return kStage1Question; }
const std::string& stage1_answer_template() { return kStage1Answer; }
const std::string& stage1_no_distortion_answer_template() {
  return kStage1NoDistortionAnswer;
}
const std::string& stage2_question() { return kStage2Question; }
const std::string& stage2_answer_template() { return kStage2Answer; }
const std::string& streaming_binary_preamble_template() {
  return kStreamingBinaryPreamble;
}
const std::string& streaming_summary_preamble_template() {
  return kStreamingSummaryPreamble;
}
const std::string& causal_question() { return kCausalQuestion; }

}  // namespace vq::templates
