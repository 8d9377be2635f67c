#pragma once

// Anytime producer/consumer runtime.
//
// A producer runs in its own thread and publishes results into a Result slot
// guarded by a mutex; consumers read the slot whenever they like and steer
// the producer through a FIFO mailbox that the producer drains at its own
// transaction boundaries (check_status).  The slot starts out void.
//
//   consumer                         producer
//   --------                         --------
//   h = start_process(f, input)      f(ctx, input):
//   h.get_result()                     loop { improve; ctx.set_result(r);
//   h.abort() / h.reset(input)                ctx.note_transaction();
//                                             if (!ctx.check_status()) return; }
//
// Status moves Running -> {Quiescent, Aborted, Resetting}, Quiescent ->
// {Aborted, Resetting} and Resetting -> Running; nothing else.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

namespace anyparse::apc {

using Clock = std::chrono::steady_clock;
using ProcessId = std::uint64_t;

enum class Status { Running, Quiescent, Aborted, Resetting };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::Quiescent: return "quiescent";
    case Status::Aborted: return "aborted";
    case Status::Resetting: return "resetting";
  }
  return "?";
}

inline bool allowed_transition(Status from, Status to) {
  switch (from) {
    case Status::Running:
      return to == Status::Quiescent || to == Status::Aborted || to == Status::Resetting;
    case Status::Quiescent:
      return to == Status::Aborted || to == Status::Resetting;
    case Status::Resetting:
      return to == Status::Running;
    case Status::Aborted:
      return false;
  }
  return false;
}

struct Transition {
  Status from;
  Status to;
};

/// What travels through the slot.  A null payload is the void result.
template <class Payload>
struct Envelope {
  std::shared_ptr<const Payload> payload;
  std::uint64_t version = 0;
  Clock::time_point published_at{};

  bool is_void() const { return payload == nullptr; }
};

/// The protected Result slot.  Every publication bumps the version by one;
/// reads copy a pointer to an immutable payload under the lock, so a reader
/// never sees a partially written value.
template <class Payload>
class ResultSlot {
 public:
  Envelope<Payload> read() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  std::uint64_t publish(Payload value) {
    auto frozen = std::make_shared<const Payload>(std::move(value));
    std::lock_guard lock(mu_);
    current_.payload = std::move(frozen);
    current_.published_at = Clock::now();
    return ++current_.version;
  }

  /// Back to void; the version still moves forward.
  std::uint64_t clear() {
    std::lock_guard lock(mu_);
    current_.payload.reset();
    current_.published_at = Clock::now();
    return ++current_.version;
  }

  std::uint64_t version() const {
    std::lock_guard lock(mu_);
    return current_.version;
  }

 private:
  mutable std::mutex mu_;
  Envelope<Payload> current_;
};

struct AbortMessage {};
template <class Input>
struct ResetMessage {
  Input input;
};
struct PingMessage {};
struct UserMessage {
  std::string tag;
  std::string payload;
};

template <class Input>
using ControlMessage = std::variant<AbortMessage, ResetMessage<Input>, PingMessage, UserMessage>;

template <class Input>
struct Directive {
  enum class Kind { Continue, StopNow, ResetWith };
  Kind kind = Kind::Continue;
  std::optional<Input> input;  // ResetWith only

  explicit operator bool() const { return kind == Kind::Continue; }
};

/// Resolves once the producer has acted on an abort or reset.
struct Acknowledgement {
  ProcessId process = 0;
  /// Transactions the producer had noted when the message was enqueued, and
  /// when it acted on it.  The difference is at most one.
  std::uint64_t transactions_at_enqueue = 0;
  std::uint64_t transactions_at_effect = 0;
};

class UnknownProcess : public std::logic_error {
 public:
  UnknownProcess() : std::logic_error("operation on an empty process handle") {}
};

class ProcessAborted : public std::runtime_error {
 public:
  explicit ProcessAborted(const std::string& what) : std::runtime_error(what) {}
};

class StartFailure : public std::runtime_error {
 public:
  explicit StartFailure(const std::string& what) : std::runtime_error(what) {}
};

template <class Payload, class Input>
class ProcessHandle;

template <class Payload, class Input>
class ProducerContext;

namespace detail {

inline std::atomic<ProcessId>& next_process_id() {
  static std::atomic<ProcessId> id{1};
  return id;
}

template <class Payload, class Input>
struct ProcessState {
  using Producer = std::function<void(ProducerContext<Payload, Input>&, Input)>;

  struct Queued {
    ControlMessage<Input> message;
    std::uint64_t enqueued_at = 0;
    std::shared_ptr<std::promise<Acknowledgement>> ack;  // Reset only
  };

  ProcessId id = 0;
  Producer producer;
  ResultSlot<Payload> slot;

  mutable std::mutex mu;
  std::condition_variable cv;
  std::deque<Queued> mailbox;
  Status status = Status::Running;
  std::vector<Transition> transitions;
  std::uint64_t transactions = 0;
  bool abort_requested = false;
  std::uint64_t abort_enqueued_at = 0;
  std::promise<Acknowledgement> abort_promise;
  std::shared_future<Acknowledgement> abort_future{abort_promise.get_future().share()};
  std::exception_ptr error;

  // Producer-side state, touched only by the producer thread.
  struct PendingReset {
    Input input;
    std::uint64_t enqueued_at;
    std::shared_ptr<std::promise<Acknowledgement>> ack;
  };
  bool stop = false;
  std::deque<PendingReset> pending_resets;
  std::function<void()> ping_hook;
  std::function<void(const std::string&, const std::string&)> user_hook;
  std::function<void()> reset_hook;

  std::thread thread;

  ~ProcessState() {
    {
      std::lock_guard lock(mu);
      if (!abort_requested && status != Status::Aborted) {
        abort_requested = true;
        abort_enqueued_at = transactions;
        mailbox.push_back({AbortMessage{}, transactions, nullptr});
      }
    }
    cv.notify_all();
    if (thread.joinable()) thread.join();
  }

  void set_status(Status to) {
    {
      std::lock_guard lock(mu);
      if (status == to) return;
      if (!allowed_transition(status, to)) {
        throw std::logic_error(std::string("illegal status transition ") + to_string(status) +
                               " -> " + to_string(to));
      }
      transitions.push_back({status, to});
      status = to;
    }
    cv.notify_all();
  }

  // Drains the mailbox in FIFO order.  Called by the producer thread only.
  void drain(std::deque<Queued>& taken) {
    for (auto& q : taken) {
      if (stop) {
        if (q.ack) q.ack->set_exception(std::make_exception_ptr(ProcessAborted("process aborted")));
        continue;
      }
      std::visit(
          [&](auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, AbortMessage>) {
              stop = true;
            } else if constexpr (std::is_same_v<M, ResetMessage<Input>>) {
              pending_resets.push_back({std::move(m.input), q.enqueued_at, q.ack});
            } else if constexpr (std::is_same_v<M, PingMessage>) {
              if (ping_hook) ping_hook();
            } else {
              if (user_hook) user_hook(m.tag, m.payload);
            }
          },
          q.message);
    }
    if (stop) fail_pending_resets("aborted before reset took effect");
  }

  void fail_pending_resets(const char* why) {
    for (auto& r : pending_resets) r.ack->set_exception(std::make_exception_ptr(ProcessAborted(why)));
    pending_resets.clear();
  }

  std::uint64_t transactions_now() const {
    std::lock_guard lock(mu);
    return transactions;
  }

  std::deque<Queued> take_mailbox() {
    std::lock_guard lock(mu);
    std::deque<Queued> taken;
    taken.swap(mailbox);
    return taken;
  }

  void run(Input input, ProducerContext<Payload, Input>& ctx);

  void launch(Input input) {
    ProducerContext<Payload, Input> ctx(this);
    run(std::move(input), ctx);
  }
};

}  // namespace detail

/// Producer-side view of a process: SetResult!, CheckStatus and the hooks
/// that CheckStatus dispatches to.
template <class Payload, class Input>
class ProducerContext {
 public:
  ProcessId id() const { return state_->id; }

  /// Publishes `value`.  After an abort has been observed this is a no-op
  /// returning the last version.
  std::uint64_t set_result(Payload value) {
    if (state_->stop) return state_->slot.version();
    return state_->slot.publish(std::move(value));
  }

  /// Marks the end of one producer transaction.
  void note_transaction() {
    std::lock_guard lock(state_->mu);
    ++state_->transactions;
  }

  std::uint64_t transactions() const {
    std::lock_guard lock(state_->mu);
    return state_->transactions;
  }

  /// Drains the mailbox.  Hooks for pings and user messages run here, in
  /// queue order.  Returns StopNow once an abort has been seen.
  Directive<Input> check_status() {
    auto taken = state_->take_mailbox();
    state_->drain(taken);
    Directive<Input> d;
    if (state_->stop) {
      d.kind = Directive<Input>::Kind::StopNow;
    } else if (!state_->pending_resets.empty()) {
      d.kind = Directive<Input>::Kind::ResetWith;
      d.input = state_->pending_resets.front().input;
    }
    return d;
  }

  /// Blocks until a message arrives or `timeout` passes.
  bool wait_for_message(std::chrono::milliseconds timeout) {
    std::unique_lock lock(state_->mu);
    return state_->cv.wait_for(lock, timeout, [&] { return !state_->mailbox.empty(); });
  }

  void on_ping(std::function<void()> hook) { state_->ping_hook = std::move(hook); }
  void on_user_message(std::function<void(const std::string&, const std::string&)> hook) {
    state_->user_hook = std::move(hook);
  }
  /// Cleanup run before the producer restarts with new input.
  void on_reset(std::function<void()> hook) { state_->reset_hook = std::move(hook); }

 private:
  friend struct detail::ProcessState<Payload, Input>;
  explicit ProducerContext(detail::ProcessState<Payload, Input>* state) : state_(state) {}
  detail::ProcessState<Payload, Input>* state_;
};

namespace detail {

template <class Payload, class Input>
void ProcessState<Payload, Input>::run(Input input, ProducerContext<Payload, Input>& ctx) {
  std::shared_ptr<std::promise<Acknowledgement>> reset_ack;
  std::uint64_t reset_enqueued_at = 0;
  for (;;) {
    if (reset_ack) {
      set_status(Status::Running);
      reset_ack->set_value({id, reset_enqueued_at, transactions_now()});
      reset_ack.reset();
    }
    try {
      producer(ctx, std::move(input));
    } catch (...) {
      std::lock_guard lock(mu);
      error = std::current_exception();
      stop = true;
    }
    if (!stop) (void)ctx.check_status();
    while (!stop && pending_resets.empty()) {
      set_status(Status::Quiescent);
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return !mailbox.empty(); });
      }
      (void)ctx.check_status();
    }
    if (stop) break;
    // One reset at a time, in arrival order.
    set_status(Status::Resetting);
    if (reset_hook) reset_hook();
    slot.clear();
    PendingReset next = std::move(pending_resets.front());
    pending_resets.pop_front();
    input = std::move(next.input);
    reset_enqueued_at = next.enqueued_at;
    reset_ack = std::move(next.ack);
  }
  fail_pending_resets("producer stopped");
  Acknowledgement ack{id, 0, 0};
  {
    std::lock_guard lock(mu);
    ack.transactions_at_enqueue = abort_enqueued_at;
    ack.transactions_at_effect = transactions;
  }
  set_status(Status::Aborted);
  abort_promise.set_value(ack);
}

}  // namespace detail

/// Consumer-side handle.  Copies share the process; when the last copy goes
/// away the process is aborted and joined.
template <class Payload, class Input>
class ProcessHandle {
 public:
  ProcessHandle() = default;

  ProcessId id() const { return state().id; }

  /// Latest envelope (possibly void).  Never blocks beyond the slot lock.
  /// Still valid after the process has been aborted.
  Envelope<Payload> get_result() const { return state().slot.read(); }

  Status status() const {
    std::lock_guard lock(state().mu);
    return state().status;
  }

  std::vector<Transition> transitions() const {
    std::lock_guard lock(state().mu);
    return state().transitions;
  }

  /// Enqueues an abort; the producer stops at its next check_status.  Calling
  /// it again returns the same acknowledgement.
  std::shared_future<Acknowledgement> abort() {
    auto& s = state();
    {
      std::lock_guard lock(s.mu);
      if (!s.abort_requested) {
        s.abort_requested = true;
        s.abort_enqueued_at = s.transactions;
        s.mailbox.push_back({AbortMessage{}, s.transactions, nullptr});
      }
    }
    s.cv.notify_all();
    return s.abort_future;
  }

  /// Enqueues a restart with `input`.  Throws ProcessAborted when the process
  /// is aborted or an abort is already queued.
  std::shared_future<Acknowledgement> reset(Input input) {
    auto& s = state();
    auto ack = std::make_shared<std::promise<Acknowledgement>>();
    auto fut = ack->get_future().share();
    {
      std::lock_guard lock(s.mu);
      if (s.abort_requested || s.status == Status::Aborted) {
        throw ProcessAborted("reset of an aborted process");
      }
      s.mailbox.push_back({ResetMessage<Input>{std::move(input)}, s.transactions, ack});
    }
    s.cv.notify_all();
    return fut;
  }

  void ping() { post(PingMessage{}); }
  void send(std::string tag, std::string payload) {
    post(UserMessage{std::move(tag), std::move(payload)});
  }

  /// Waits until the status satisfies `pred` or `timeout` elapses.
  template <class Pred>
  bool wait_status(Pred pred, std::chrono::milliseconds timeout) const {
    auto& s = state();
    std::unique_lock lock(s.mu);
    return s.cv.wait_for(lock, timeout, [&] { return pred(s.status); });
  }

  /// Exception that escaped the producer, if any.
  std::exception_ptr error() const {
    std::lock_guard lock(state().mu);
    return state().error;
  }

  explicit operator bool() const { return state_ != nullptr; }

 private:
  template <class P, class I, class F>
  friend ProcessHandle<P, I> start_process(F producer, I input);

  detail::ProcessState<Payload, Input>& state() const {
    if (!state_) throw UnknownProcess();
    return *state_;
  }

  void post(ControlMessage<Input> m) {
    auto& s = state();
    {
      std::lock_guard lock(s.mu);
      s.mailbox.push_back({std::move(m), s.transactions, nullptr});
    }
    s.cv.notify_all();
  }

  std::shared_ptr<detail::ProcessState<Payload, Input>> state_;
};

/// Starts `producer(ctx, input)` in a new thread with a fresh void slot.
/// Throws StartFailure when no thread can be created.
template <class Payload, class Input, class F>
ProcessHandle<Payload, Input> start_process(F producer, Input input) {
  auto state = std::make_shared<detail::ProcessState<Payload, Input>>();
  state->id = detail::next_process_id().fetch_add(1);
  state->producer = std::move(producer);
  auto* raw = state.get();
  try {
    raw->thread = std::thread([raw, in = std::move(input)]() mutable { raw->launch(std::move(in)); });
  } catch (const std::system_error& e) {
    throw StartFailure(std::string("cannot start producer: ") + e.what());
  }
  ProcessHandle<Payload, Input> h;
  h.state_ = std::move(state);
  return h;
}

}  // namespace anyparse::apc
