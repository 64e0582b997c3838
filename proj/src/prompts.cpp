#include "sv/prompts.hpp"

namespace sv::prompts {

const char* const kHighLevelSystem = R"(You are a video motion planning expert. You have EXACTLY {total_frames} frames to complete the ENTIRE task.)";

const char* const kHighLevelUser = R"(Text prompt: "{text_prompt}"
Available frames: EXACTLY {total_frames}.
Current objects in frame 1:
{object_list}

Break the task into 1 to 4 sequential phases. Phase durations are frame counts
that must sum to exactly {total_frames}.

Return ONLY a JSON object of the form:
{
  "phases": [
    {
      "action": "<short phase description>",
      "duration": <frame count>,
      "moving": ["<object id>", ...],
      "static": ["<object id>", ...],
      "goal": {
        "region": [x_min, y_min, x_max, y_max],
        "direction": [dx, dy],
        "description": "<expected end state>"
      }
    }
  ]
}
No text before or after the JSON object.)";

const char* const kObjectProposalSystem = R"(You are an expert in video generation and object-centric scene analysis.
Given the first frame of a video and a text description, determine which
objects should be added, moved, or animated to fulfill the described action.

Your responsibilities:
1. Analyze the given frame and identify all existing objects.
2. Based on the text prompt, determine which additional objects (if any)
   must be introduced to achieve the described event.
3. Identify which objects—either existing or newly added—must move or
   animate to satisfy the prompt.
4. Ensure that proposed object placement and motion are physically
   plausible and consistent with real-world interactions.
5. Focus on major objects that materially affect the scene. If multiple
   parts form a single rigid object, treat them as one entity.
6. For each object name, use minimal wording (1-3 words), concise and
   unambiguous.

Return the result strictly in the following JSON format:

{
  "scene_analysis": "Brief description of the current frame",
  "existing_objects": ["..."],
  "objects_to_add": [
    {
      "name": "object_name",
      "reasoning": "why this object is required",
      "movement_type": "static / linear / curved / complex",
      "priority": "high / medium / low"
    }
  ],
  "moving_objects": ["..."],
  "static_objects": ["..."]
})";

const char* const kObjectProposalUser = R"(Text prompt: "{text_prompt}"

Using the first-frame image provided, analyze how the scene should be
modified or animated to satisfy the text description.

Please determine:
- Which required objects are currently missing, based on the prompt.
- Which objects must move or animate to create the described action.
- Which objects remain static as part of the background.
- Realistic object placement and timing relative to the prompt's intent.

Produce the full JSON output exactly as specified in the system instructions.)";

const char* const kTrajectorySystem = R"(You are a video motion planning expert generating trajectories for frames
{chunk_start} to {chunk_end}.

Current phase: {phase_name}
Phase description: {phase_description}
Total frames in video: {total_frames}

**COORDINATE SYSTEM:**
{coords_guide}

**DIRECTIONAL MAPPINGS:**
- RIGHT: x1 += delta; x2 += delta
- LEFT:  x1 -= delta; x2 -= delta
- UP:    y1 -= delta; y2 -= delta
- DOWN:  y1 += delta; y2 += delta

Focus ONLY on moving objects: {moving_objects}
Ignore static objects in outputs: {static_objects})";

const char* const kTrajectoryUser = R"(Text prompt: "{text_prompt}"

{history_text}

Generate a smooth trajectory from frame {chunk_start} to frame {chunk_end}
for this {phase_name}.

IMPORTANT: Since multiple trajectories will be generated, explore DIFFERENT
valid motion paths. Consider variations in:
- Path shape (straight, curved, arc)
- Speed profile (constant, accelerating, decelerating)
- Intermediate waypoints (different approaches to the goal)

For each object, you should maintain its size (box dimensions) and only
change its position unless you are specifically instructed to resize.

Produce {num_candidates} candidate trajectories. Start each candidate with a
line "Candidate N:" and for EACH frame from {chunk_start} to {chunk_end}, output:
Frame_N: [["object_name", [x1, y1, x2, y2]], ...], caption: <description>

Requirements:
- Smooth motion (delta 0.03-0.08 per frame)
- Consistent with phase objectives
- Maintain object sizes
- Only include moving objects: {moving_objects})";

const char* const kAlignmentSystem = R"(You are an expert at evaluating video motion trajectories.
Your task is to verify if the motion from the first frame to the last frame
aligns with the expected phase goal.

Rate the alignment on a scale of 0.0 to 1.0 where:
- 1.0 = Perfect alignment, the last frame clearly achieves the phase goal
- 0.7-0.9 = Good alignment with minor deviations
- 0.4-0.6 = Partial alignment, some aspects correct
- 0.0-0.3 = Poor alignment, does not achieve the goal

Return ONLY a JSON object with:
{
  "score": <float between 0 and 1>,
  "explanation": "<brief explanation of why this score was given>"
})";

const char* const kAlignmentUser = R"(Phase: {phase_name}
Phase Description: {phase_description}
Expected End Goal: {end_goal}

Please compare the FIRST frame (starting state) with the LAST frame (ending state).
Does the last frame show that the phase goal has been achieved?

Consider:
- Object positions relative to the goal
- Whether objects moved in the expected direction
- Whether the motion is consistent with the phase description)";

const char* const kPhysicsPrompt = R"(Analyze this video sequence and evaluate whether the motion obeys physical laws.

IMPORTANT NOTE: This video is generated by copy & paste composition - each frame is
created by pasting objects onto a background. Therefore, please focus on evaluating
the movement trajectories and positions of individual objects across frames, not
visual quality, shadows, or composition artifacts.

Consider for each moving object (one of the laws):
Newtonian Consistency: acceleration / deceleration should be physically plausible;
Penetration Violation: objects must not pass through static elements;
Gravitational Coherence: objects should not be floating in the air without
anything holding it
Deformation Consistency: object size should remain stable unless specified.


Rate the physical plausibility on a scale of 0.0 to 1.0 where:
- 1.0 = Perfectly realistic, obeys this physical laws
- 0.7-0.9 = Mostly realistic with minor issues
- 0.4-0.6 = Some unrealistic aspects but acceptable
- 0.0-0.3 = Highly unrealistic, violates physics (teleportation, impossible speeds,
etc.)

Return ONLY a JSON object:
{
  "score": <float between 0 and 1>,
  "explanation": "<brief explanation focusing on object movement quality,
                  highlight any physics violations>"
}

Example:
{law_example})";

std::string fill(const std::string& tmpl, const std::map<std::string, std::string>& slots) {
    std::string out = tmpl;
    for (const auto& [key, value] : slots) {
        const std::string needle = "{" + key + "}";
        size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string physics_law_focus(const std::string& law) {
    if (law == "newton")
        return "Focus on Newtonian Consistency: sudden teleports or impossible "
               "accelerations rate 0.0-0.3.";
    if (law == "penetration")
        return "Focus on Penetration Violation: an object moving through a static "
               "element rates 0.0-0.3.";
    if (law == "gravity")
        return "Focus on Gravitational Coherence: an object hovering mid-air with no "
               "support rates 0.0-0.3.";
    if (law == "deformation")
        return "Focus on Deformation Consistency: an object whose size drifts without "
               "instruction rates 0.0-0.3.";
    return "Focus on overall physical plausibility.";
}

}  // namespace sv::prompts
