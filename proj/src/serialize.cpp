#include "pmrl/serialize.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace pmrl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_key(const StateKey& k) {
    return "(" + std::to_string(k.x) + "," + std::to_string(k.y) + ")";
}

StateKey parse_key(const std::string& token) {
    int x = 0, y = 0;
    if (std::sscanf(token.c_str(), "(%d,%d)", &x, &y) != 2)
        throw IoError("malformed state key token: " + token);
    return {x, y};
}

std::string expect_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(std::string("truncated stream, expected ") + what);
    return line;
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream ls(line);
    std::vector<std::string> out;
    std::string tok;
    while (ls >> tok) out.push_back(tok);
    return out;
}

}  // namespace

void write_task(std::ostream& out, const TabularTask& task) {
    out << "pmrl-task 1\n";
    out << "id " << task.id() << " states " << task.n_states() << " actions " << task.n_actions()
        << " gamma " << fmt(task.gamma()) << " rmax " << fmt(task.r_max()) << "\n";
    out << "keys";
    for (int s = 0; s < task.n_states(); ++s) out << ' ' << fmt_key(task.key_of(s));
    out << "\n";
    out << "terminal";
    for (int s = 0; s < task.n_states(); ++s)
        if (task.is_terminal(s)) out << ' ' << s;
    out << "\n";
    out << "rho0";
    for (int s = 0; s < task.n_states(); ++s)
        if (task.rho0()[static_cast<std::size_t>(s)] > 0.0)
            out << ' ' << s << ':' << fmt(task.rho0()[static_cast<std::size_t>(s)]);
    out << "\n";
    for (int s = 0; s < task.n_states(); ++s) {
        for (int a = 0; a < task.n_actions(); ++a) {
            out << "row " << fmt_key(task.key_of(s)) << '/' << a << ' '
                << fmt(task.reward(s, a));
            for (const auto& e : task.transitions(s, a))
                out << ' ' << fmt_key(task.key_of(e.next_state)) << ':' << fmt(e.prob);
            out << "\n";
        }
    }
    out << "end\n";
}

TabularTask read_task(std::istream& in) {
    if (expect_line(in, "task magic") != "pmrl-task 1") throw IoError("missing task header");

    auto head = tokens_of(expect_line(in, "task dimensions"));
    if (head.size() != 10 || head[0] != "id" || head[2] != "states" || head[4] != "actions" ||
        head[6] != "gamma" || head[8] != "rmax")
        throw IoError("malformed task dimension line");
    const int id = std::stoi(head[1]);
    const int n_states = std::stoi(head[3]);
    const int n_actions = std::stoi(head[5]);
    const double gamma = std::stod(head[7]);
    const double r_max = std::stod(head[9]);

    auto key_toks = tokens_of(expect_line(in, "keys"));
    if (key_toks.empty() || key_toks[0] != "keys" ||
        key_toks.size() != static_cast<std::size_t>(n_states) + 1)
        throw IoError("malformed keys line");
    std::vector<StateKey> keys;
    std::map<StateKey, int> index_of;
    for (int s = 0; s < n_states; ++s) {
        keys.push_back(parse_key(key_toks[static_cast<std::size_t>(s) + 1]));
        index_of[keys.back()] = s;
    }
    TabularTask task(id, n_states, n_actions, gamma, r_max, std::move(keys));

    auto term_toks = tokens_of(expect_line(in, "terminal"));
    if (term_toks.empty() || term_toks[0] != "terminal") throw IoError("malformed terminal line");
    for (std::size_t i = 1; i < term_toks.size(); ++i)
        task.set_terminal(std::stoi(term_toks[i]), true);

    auto rho_toks = tokens_of(expect_line(in, "rho0"));
    if (rho_toks.empty() || rho_toks[0] != "rho0") throw IoError("malformed rho0 line");
    std::vector<double> rho0(static_cast<std::size_t>(n_states), 0.0);
    for (std::size_t i = 1; i < rho_toks.size(); ++i) {
        const auto sep = rho_toks[i].find(':');
        if (sep == std::string::npos) throw IoError("malformed rho0 entry");
        rho0[static_cast<std::size_t>(std::stoi(rho_toks[i].substr(0, sep)))] =
            std::stod(rho_toks[i].substr(sep + 1));
    }
    task.set_rho0(std::move(rho0));

    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            auto row_toks = tokens_of(expect_line(in, "row"));
            if (row_toks.size() < 3 || row_toks[0] != "row") throw IoError("malformed row line");
            const auto slash = row_toks[1].find('/');
            if (slash == std::string::npos) throw IoError("malformed row entry key");
            const StateKey key = parse_key(row_toks[1].substr(0, slash));
            const int action = std::stoi(row_toks[1].substr(slash + 1));
            const auto it = index_of.find(key);
            if (it == index_of.end() || it->second != s || action != a)
                throw IoError("row lines out of order");
            task.set_reward(s, a, std::stod(row_toks[2]));
            std::vector<TransitionEntry> row;
            for (std::size_t i = 3; i < row_toks.size(); ++i) {
                const auto sep = row_toks[i].rfind(':');
                if (sep == std::string::npos) throw IoError("malformed transition entry");
                const auto target = index_of.find(parse_key(row_toks[i].substr(0, sep)));
                if (target == index_of.end()) throw IoError("transition to unknown key");
                row.push_back({target->second, std::stod(row_toks[i].substr(sep + 1))});
            }
            task.set_transitions(s, a, std::move(row));
        }
    }
    if (expect_line(in, "task end") != "end") throw IoError("missing task end marker");
    task.validate();
    return task;
}

void write_family(std::ostream& out, const TaskFamily& family) {
    out << "pmrl-family 1\n";
    out << "tasks " << family.n_tasks() << "\n";
    for (const auto& task : family.tasks()) write_task(out, task);
    out << "end\n";
}

TaskFamily read_family(std::istream& in) {
    if (expect_line(in, "family magic") != "pmrl-family 1") throw IoError("missing family header");
    auto toks = tokens_of(expect_line(in, "task count"));
    if (toks.size() != 2 || toks[0] != "tasks") throw IoError("malformed task count");
    const int n = std::stoi(toks[1]);
    std::vector<TabularTask> tasks;
    tasks.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) tasks.push_back(read_task(in));
    if (expect_line(in, "family end") != "end") throw IoError("missing family end marker");
    return TaskFamily(std::move(tasks));
}

void write_qtable(std::ostream& out, const TabularTask& task, const QTable& q) {
    if (!q.matches(task)) throw InvalidState("Q-table does not match the task");
    out << "pmrl-qtable 1\n";
    out << "task " << task.id() << " states " << task.n_states() << " actions "
        << task.n_actions() << "\n";
    for (int s = 0; s < task.n_states(); ++s)
        for (int a = 0; a < task.n_actions(); ++a)
            out << fmt_key(task.key_of(s)) << '/' << a << ' ' << fmt(q(s, a)) << "\n";
    out << "end\n";
}

QTable read_qtable(std::istream& in, const TabularTask& task) {
    if (expect_line(in, "qtable magic") != "pmrl-qtable 1") throw IoError("missing qtable header");
    auto head = tokens_of(expect_line(in, "qtable dimensions"));
    if (head.size() != 6 || head[0] != "task" ||
        std::stoi(head[3]) != task.n_states() || std::stoi(head[5]) != task.n_actions())
        throw IoError("qtable does not match the task shape");
    QTable q(std::stoi(head[1]), task.n_states(), task.n_actions());
    for (int s = 0; s < task.n_states(); ++s) {
        for (int a = 0; a < task.n_actions(); ++a) {
            auto toks = tokens_of(expect_line(in, "qtable entry"));
            if (toks.size() != 2) throw IoError("malformed qtable entry");
            q(s, a) = std::stod(toks[1]);
        }
    }
    if (expect_line(in, "qtable end") != "end") throw IoError("missing qtable end marker");
    return q;
}

void write_meta(std::ostream& out, const TaskFamily& family, const MetaQTable& meta) {
    out << "pmrl-meta 1\n";
    out << "entries " << meta.size() << "\n";
    for (std::size_t k = 0; k < meta.size(); ++k) {
        const auto& key = family.union_keys()[k];
        out << fmt_key(key.state) << '/' << key.action << ' ' << fmt(meta[k]) << "\n";
    }
    out << "end\n";
}

MetaQTable read_meta(std::istream& in, const TaskFamily& family) {
    if (expect_line(in, "meta magic") != "pmrl-meta 1") throw IoError("missing meta header");
    auto toks = tokens_of(expect_line(in, "meta size"));
    if (toks.size() != 2 || toks[0] != "entries" ||
        std::stoull(toks[1]) != family.n_union_keys())
        throw IoError("meta table does not match the family");
    MetaQTable meta(family);
    for (std::size_t k = 0; k < meta.size(); ++k) {
        auto entry = tokens_of(expect_line(in, "meta entry"));
        if (entry.size() != 2) throw IoError("malformed meta entry");
        meta[k] = std::stod(entry[1]);
    }
    if (expect_line(in, "meta end") != "end") throw IoError("missing meta end marker");
    return meta;
}

void write_checkpoint(std::ostream& out, const TaskFamily& family, const TrainingState& state) {
    out << "pmrl-checkpoint 1\n";
    out << "round " << state.round << "\n";
    write_meta(out, family, state.meta);
    for (int i = 0; i < family.n_tasks(); ++i) {
        write_qtable(out, family.task(i), state.personalized[static_cast<std::size_t>(i)]);
        write_qtable(out, family.task(i), state.auxiliary[static_cast<std::size_t>(i)]);
    }
    out << "end\n";
}

TrainingState read_checkpoint(std::istream& in, const TaskFamily& family) {
    if (expect_line(in, "checkpoint magic") != "pmrl-checkpoint 1")
        throw IoError("missing checkpoint header");
    auto toks = tokens_of(expect_line(in, "round"));
    if (toks.size() != 2 || toks[0] != "round") throw IoError("malformed round line");
    TrainingState state;
    state.round = std::stoi(toks[1]);
    state.meta = read_meta(in, family);
    for (int i = 0; i < family.n_tasks(); ++i) {
        state.personalized.push_back(read_qtable(in, family.task(i)));
        state.auxiliary.push_back(read_qtable(in, family.task(i)));
    }
    if (expect_line(in, "checkpoint end") != "end") throw IoError("missing checkpoint end marker");
    state.validate(family);
    return state;
}

std::string to_string(const TabularTask& task) {
    std::ostringstream out;
    write_task(out, task);
    return out.str();
}

std::string to_string(const TaskFamily& family) {
    std::ostringstream out;
    write_family(out, family);
    return out.str();
}

std::string to_string(const TabularTask& task, const QTable& q) {
    std::ostringstream out;
    write_qtable(out, task, q);
    return out.str();
}

}  // namespace pmrl
