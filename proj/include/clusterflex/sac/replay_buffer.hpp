#pragma once

// Ring buffer of (s, a, r, s', done). Storage grows on demand up to the
// capacity, so a large nominal capacity costs nothing until it is used.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "clusterflex/nn/mlp.hpp"

namespace clusterflex::sac {

template <typename S>
struct Batch {
  nn::Mat<S> obs;       // obs_dim x B
  nn::Mat<S> action;    // act_dim x B
  Eigen::Matrix<S, 1, Eigen::Dynamic> reward;
  nn::Mat<S> next_obs;
  Eigen::Matrix<S, 1, Eigen::Dynamic> done;  // 1 for terminal transitions

  Eigen::Index size() const { return obs.cols(); }
};

template <typename S>
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim)
      : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
    if (capacity == 0) throw RangeError("replay buffer capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  std::uint64_t total_added() const { return added_; }

  void add(std::span<const double> s, std::span<const double> a, double r, std::span<const double> s2, bool done) {
    if (s.size() != obs_dim_ || s2.size() != obs_dim_ || a.size() != act_dim_)
      throw ShapeError("transition does not match the buffer dimensions");
    const std::size_t slot = cursor_;
    if (slot >= size_) {  // growing
      obs_.resize((slot + 1) * obs_dim_);
      next_obs_.resize((slot + 1) * obs_dim_);
      act_.resize((slot + 1) * act_dim_);
      rew_.resize(slot + 1);
      done_.resize(slot + 1);
    }
    std::transform(s.begin(), s.end(), obs_.begin() + slot * obs_dim_, [](double v) { return static_cast<S>(v); });
    std::transform(s2.begin(), s2.end(), next_obs_.begin() + slot * obs_dim_,
                   [](double v) { return static_cast<S>(v); });
    std::transform(a.begin(), a.end(), act_.begin() + slot * act_dim_, [](double v) { return static_cast<S>(v); });
    rew_[slot] = static_cast<S>(r);
    done_[slot] = done ? S(1) : S(0);
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
    ++added_;
  }

  // Uniform sampling with replacement.
  Batch<S> sample(std::size_t batch, std::mt19937_64& rng) const {
    if (size_ == 0) throw Error("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = pick(rng);
    return gather(idx);
  }

  Batch<S> gather(std::span<const std::size_t> idx) const {
    const auto B = static_cast<Eigen::Index>(idx.size());
    Batch<S> b;
    b.obs.resize(static_cast<Eigen::Index>(obs_dim_), B);
    b.next_obs.resize(static_cast<Eigen::Index>(obs_dim_), B);
    b.action.resize(static_cast<Eigen::Index>(act_dim_), B);
    b.reward.resize(B);
    b.done.resize(B);
    for (Eigen::Index j = 0; j < B; ++j) {
      const std::size_t k = idx[static_cast<std::size_t>(j)];
      if (k >= size_) throw RangeError("replay index out of range");
      std::copy_n(obs_.begin() + k * obs_dim_, obs_dim_, b.obs.col(j).data());
      std::copy_n(next_obs_.begin() + k * obs_dim_, obs_dim_, b.next_obs.col(j).data());
      std::copy_n(act_.begin() + k * act_dim_, act_dim_, b.action.col(j).data());
      b.reward(j) = rew_[k];
      b.done(j) = done_[k];
    }
    return b;
  }

  // Raw storage for serialization.
  const std::vector<S>& observations() const { return obs_; }
  const std::vector<S>& next_observations() const { return next_obs_; }
  const std::vector<S>& actions() const { return act_; }
  const std::vector<S>& rewards() const { return rew_; }
  const std::vector<S>& dones() const { return done_; }

  void restore(std::vector<S> obs, std::vector<S> act, std::vector<S> rew, std::vector<S> next_obs,
               std::vector<S> done, std::size_t size, std::size_t cursor, std::uint64_t added) {
    if (size > capacity_ || cursor >= capacity_ || obs.size() != size * obs_dim_ || next_obs.size() != obs.size() ||
        act.size() != size * act_dim_ || rew.size() != size || done.size() != size)
      throw ShapeError("replay buffer snapshot is inconsistent");
    obs_ = std::move(obs);
    act_ = std::move(act);
    rew_ = std::move(rew);
    next_obs_ = std::move(next_obs);
    done_ = std::move(done);
    size_ = size;
    cursor_ = cursor;
    added_ = added;
  }

 private:
  std::size_t capacity_ = 1;
  std::size_t obs_dim_ = 0, act_dim_ = 0;
  std::size_t size_ = 0, cursor_ = 0;
  std::uint64_t added_ = 0;
  std::vector<S> obs_, act_, rew_, next_obs_, done_;
};

}  // namespace clusterflex::sac
