#include "crca/model.hpp"

#include <algorithm>
#include <sstream>

namespace crca {

namespace {

bool sorted_unique(const std::vector<int>& v) {
  for (size_t k = 1; k < v.size(); ++k)
    if (v[k - 1] >= v[k]) return false;
  return true;
}

std::string at(int user, int channel) {
  std::ostringstream os;
  os << "(" << user + 1 << "," << channel + 1 << ")";
  return os.str();
}

}  // namespace

std::vector<int> Assignment::total(int user) const {
  std::vector<int> out;
  std::merge(exclusive[user].begin(), exclusive[user].end(), shared[user].begin(),
             shared[user].end(), std::back_inserter(out));
  return out;
}

Assignment Assignment::empty(int num_users) {
  Assignment a;
  a.exclusive.resize(num_users);
  a.shared.resize(num_users);
  return a;
}

MacTiming paper2012_timing() { return MacTiming{}; }

SensingModel SensingModel::perfect(int num_users, int num_channels) {
  SensingModel s;
  s.p_d = Matrix::Ones(num_users, num_channels);
  s.p_f = Matrix::Zero(num_users, num_channels);
  return s;
}

bool SensingModel::is_perfect() const {
  return (p_d.array() == 1.0).all() && (p_f.array() == 0.0).all();
}

void validate_model(const AvailabilityModel& model) {
  if (model.num_users < 1) throw ValidationError("num_users must be positive");
  if (model.num_channels < 1) throw ValidationError("num_channels must be positive");
  if (model.p.rows() != model.num_users || model.p.cols() != model.num_channels)
    throw ValidationError("dimension mismatch: p matrix is not M x N");
  for (int i = 0; i < model.num_users; ++i)
    for (int j = 0; j < model.num_channels; ++j)
      if (!(model.p(i, j) >= 0.0 && model.p(i, j) <= 1.0))
        throw ValidationError("probability out of range at " + at(i, j));
}

void validate_assignment(const AvailabilityModel& model, const Assignment& assignment) {
  const int m = model.num_users;
  const int n = model.num_channels;
  if (assignment.num_users() != m || static_cast<int>(assignment.shared.size()) != m)
    throw ValidationError("dimension mismatch: assignment does not cover M users");

  std::vector<int> excl_owner(n, -1);
  for (int i = 0; i < m; ++i) {
    if (!sorted_unique(assignment.exclusive[i]) || !sorted_unique(assignment.shared[i]))
      throw ValidationError("channel set of user " + std::to_string(i + 1) +
                            " is not sorted ascending without duplicates");
    for (int j : assignment.exclusive[i]) {
      if (j < 0 || j >= n)
        throw ValidationError("channel index out of range at " + at(i, j));
      if (excl_owner[j] >= 0)
        throw ValidationError("exclusive-set overlap: channel " + std::to_string(j + 1) +
                              " owned by users " + std::to_string(excl_owner[j] + 1) +
                              " and " + std::to_string(i + 1));
      excl_owner[j] = i;
    }
    for (int j : assignment.shared[i])
      if (j < 0 || j >= n)
        throw ValidationError("channel index out of range at " + at(i, j));
    std::vector<int> both;
    std::set_intersection(assignment.exclusive[i].begin(), assignment.exclusive[i].end(),
                          assignment.shared[i].begin(), assignment.shared[i].end(),
                          std::back_inserter(both));
    if (!both.empty())
      throw ValidationError("channel " + std::to_string(both.front() + 1) +
                            " is both exclusive and shared for user " + std::to_string(i + 1));
  }
  std::vector<int> sharer_count(n, 0);
  for (int i = 0; i < m; ++i)
    for (int j : assignment.shared[i]) {
      if (excl_owner[j] >= 0)
        throw ValidationError("shared-channel-in-exclusive-set conflict: channel " +
                              std::to_string(j + 1) + " is exclusive to user " +
                              std::to_string(excl_owner[j] + 1) + " but shared by user " +
                              std::to_string(i + 1));
      ++sharer_count[j];
    }
  for (int j = 0; j < n; ++j)
    if (sharer_count[j] == 1)
      throw ValidationError("shared channel " + std::to_string(j + 1) +
                            " has a single sharer; a shared channel needs at least two");
}

void validate_timing(const MacTiming& timing) {
  const double durations[] = {timing.slot_us, timing.rts_us, timing.cts_us,
                              timing.sifs_us, timing.sen_us, timing.syn_us};
  for (double d : durations)
    if (d < 0.0) throw ValidationError("timing durations must be non-negative");
  if (!(timing.cycle_us > timing.fixed_overhead_us()))
    throw ValidationError("cycle_us must exceed the fixed per-cycle message overhead");
  if (!(timing.epsilon_p > 0.0 && timing.epsilon_p < 1.0))
    throw ValidationError("epsilon_p must lie in (0,1)");
  if (timing.w_max < 2) throw ValidationError("w_max must be at least 2");
}

void validate_sensing(const AvailabilityModel& model, const SensingModel& sensing) {
  if (sensing.p_d.rows() != model.num_users || sensing.p_d.cols() != model.num_channels ||
      sensing.p_f.rows() != model.num_users || sensing.p_f.cols() != model.num_channels)
    throw ValidationError("dimension mismatch: sensing matrices are not M x N");
  for (int i = 0; i < model.num_users; ++i)
    for (int j = 0; j < model.num_channels; ++j) {
      if (!(sensing.p_d(i, j) >= 0.0 && sensing.p_d(i, j) <= 1.0))
        throw ValidationError("detection probability out of range at " + at(i, j));
      if (!(sensing.p_f(i, j) >= 0.0 && sensing.p_f(i, j) <= 1.0))
        throw ValidationError("false-alarm probability out of range at " + at(i, j));
    }
}

void validate_scenario(const AvailabilityModel& model, const Assignment& assignment,
                       const MacTiming& timing, const SensingModel* sensing) {
  validate_model(model);
  validate_assignment(model, assignment);
  validate_timing(timing);
  if (sensing != nullptr) validate_sensing(model, *sensing);
}

DerivedViews derive_views(const Assignment& assignment, int num_channels) {
  DerivedViews views;
  views.sharers.assign(num_channels, {});
  views.owner.assign(num_channels, -1);
  for (int i = 0; i < assignment.num_users(); ++i) {
    for (int j : assignment.exclusive[i]) {
      views.owner[j] = i;
      views.sharers[j] = {i};
    }
    for (int j : assignment.shared[i]) views.sharers[j].push_back(i);
  }
  for (int j = 0; j < num_channels; ++j) {
    const int l = static_cast<int>(views.sharers[j].size());
    if (l >= 2) views.groups[l].push_back(j);
  }
  return views;
}

BinaryAssignmentMatrix to_binary(const Assignment& assignment, int num_channels) {
  BinaryAssignmentMatrix b;
  b.x = Eigen::MatrixXi::Zero(assignment.num_users(), num_channels);
  for (int i = 0; i < assignment.num_users(); ++i)
    for (int j : assignment.total(i)) b.x(i, j) = 1;
  return b;
}

Assignment from_binary(const BinaryAssignmentMatrix& binary) {
  const int m = static_cast<int>(binary.x.rows());
  const int n = static_cast<int>(binary.x.cols());
  Assignment a = Assignment::empty(m);
  for (int j = 0; j < n; ++j) {
    std::vector<int> holders;
    for (int i = 0; i < m; ++i)
      if (binary.x(i, j) != 0) holders.push_back(i);
    if (holders.size() == 1)
      a.exclusive[holders.front()].push_back(j);
    else
      for (int i : holders) a.shared[i].push_back(j);
  }
  return a;
}

void canonicalize(Assignment& assignment) {
  for (auto* sets : {&assignment.exclusive, &assignment.shared})
    for (auto& s : *sets) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
}

}  // namespace crca
