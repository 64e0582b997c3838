#pragma once

#include <map>
#include <string>

namespace sv::prompts {

// Backend prompt assets. Templates carry {slot} placeholders; fill()
// substitutes them and leaves unknown slots untouched.

extern const char* const kHighLevelSystem;
extern const char* const kHighLevelUser;
extern const char* const kObjectProposalSystem;
extern const char* const kObjectProposalUser;
extern const char* const kTrajectorySystem;
extern const char* const kTrajectoryUser;
extern const char* const kAlignmentSystem;
extern const char* const kAlignmentUser;
extern const char* const kPhysicsPrompt;

std::string fill(const std::string& tmpl,
                 const std::map<std::string, std::string>& slots);

/// Per-law one-line focus appended to the physics prompt's example slot.
std::string physics_law_focus(const std::string& law);

}  // namespace sv::prompts
