#include "facetlm/porter.hpp"

#include <string>

namespace facetlm {
namespace {

// State machine over a mutable buffer. `k` is the index of the last
// character of the current word, `j` a general offset set by ends().
class PorterStemmer {
  public:
    explicit PorterStemmer(std::string_view word) : m_b(word), m_k(static_cast<int>(word.size()) - 1) {}

    std::string run()
    {
        if (m_k <= 1) {
            return m_b;
        }
        step1ab();
        if (m_k > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return m_b.substr(0, static_cast<std::size_t>(m_k + 1));
    }

  private:
    [[nodiscard]] bool cons(int i) const
    {
        switch (m_b[static_cast<std::size_t>(i)]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u': return false;
        case 'y': return i == 0 ? true : !cons(i - 1);
        default: return true;
        }
    }

    // Number of VC sequences in b[0..j].
    [[nodiscard]] int measure() const
    {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > m_j) {
                return n;
            }
            if (!cons(i)) {
                break;
            }
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > m_j) {
                    return n;
                }
                if (cons(i)) {
                    break;
                }
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > m_j) {
                    return n;
                }
                if (!cons(i)) {
                    break;
                }
                ++i;
            }
            ++i;
        }
    }

    [[nodiscard]] bool vowel_in_stem() const
    {
        for (int i = 0; i <= m_j; ++i) {
            if (!cons(i)) {
                return true;
            }
        }
        return false;
    }

    [[nodiscard]] bool double_consonant(int j) const
    {
        if (j < 1) {
            return false;
        }
        if (at(j) != at(j - 1)) {
            return false;
        }
        return cons(j);
    }

    // consonant-vowel-consonant ending at i, where the last c is not w, x or y
    [[nodiscard]] bool cvc(int i) const
    {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) {
            return false;
        }
        char ch = at(i);
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s)
    {
        int len = static_cast<int>(s.size());
        if (len > m_k + 1) {
            return false;
        }
        if (std::string_view(m_b).substr(static_cast<std::size_t>(m_k - len + 1), s.size()) != s) {
            return false;
        }
        m_j = m_k - len;
        return true;
    }

    void set_to(std::string_view s)
    {
        m_b.replace(static_cast<std::size_t>(m_j + 1), std::string::npos, s);
        m_k = m_j + static_cast<int>(s.size());
    }

    void replace_if_measured(std::string_view s)
    {
        if (measure() > 0) {
            set_to(s);
        }
    }

    void truncate() { m_b.resize(static_cast<std::size_t>(m_k + 1)); }

    [[nodiscard]] char at(int i) const { return m_b[static_cast<std::size_t>(i)]; }

    void step1ab()
    {
        if (at(m_k) == 's') {
            if (ends("sses")) {
                m_k -= 2;
            } else if (ends("ies")) {
                set_to("i");
            } else if (at(m_k - 1) != 's') {
                --m_k;
            }
        }
        truncate();
        if (ends("eed")) {
            if (measure() > 0) {
                --m_k;
            }
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            m_k = m_j;
            truncate();
            if (ends("at")) {
                set_to("ate");
            } else if (ends("bl")) {
                set_to("ble");
            } else if (ends("iz")) {
                set_to("ize");
            } else if (double_consonant(m_k)) {
                --m_k;
                char ch = at(m_k);
                if (ch == 'l' || ch == 's' || ch == 'z') {
                    ++m_k;
                }
            } else {
                m_j = m_k;
                if (measure() == 1 && cvc(m_k)) {
                    set_to("e");
                }
            }
        }
        truncate();
    }

    void step1c()
    {
        if (ends("y") && vowel_in_stem()) {
            m_b[static_cast<std::size_t>(m_k)] = 'i';
        }
    }

    void step2()
    {
        switch (at(m_k - 1)) {
        case 'a':
            if (ends("ational")) {
                replace_if_measured("ate");
            } else if (ends("tional")) {
                replace_if_measured("tion");
            }
            break;
        case 'c':
            if (ends("enci")) {
                replace_if_measured("ence");
            } else if (ends("anci")) {
                replace_if_measured("ance");
            }
            break;
        case 'e':
            if (ends("izer")) {
                replace_if_measured("ize");
            }
            break;
        case 'l':
            if (ends("bli")) {
                replace_if_measured("ble");
            } else if (ends("alli")) {
                replace_if_measured("al");
            } else if (ends("entli")) {
                replace_if_measured("ent");
            } else if (ends("eli")) {
                replace_if_measured("e");
            } else if (ends("ousli")) {
                replace_if_measured("ous");
            }
            break;
        case 'o':
            if (ends("ization")) {
                replace_if_measured("ize");
            } else if (ends("ation")) {
                replace_if_measured("ate");
            } else if (ends("ator")) {
                replace_if_measured("ate");
            }
            break;
        case 's':
            if (ends("alism")) {
                replace_if_measured("al");
            } else if (ends("iveness")) {
                replace_if_measured("ive");
            } else if (ends("fulness")) {
                replace_if_measured("ful");
            } else if (ends("ousness")) {
                replace_if_measured("ous");
            }
            break;
        case 't':
            if (ends("aliti")) {
                replace_if_measured("al");
            } else if (ends("iviti")) {
                replace_if_measured("ive");
            } else if (ends("biliti")) {
                replace_if_measured("ble");
            }
            break;
        case 'g':
            if (ends("logi")) {
                replace_if_measured("log");
            }
            break;
        default: break;
        }
    }

    void step3()
    {
        switch (at(m_k)) {
        case 'e':
            if (ends("icate")) {
                replace_if_measured("ic");
            } else if (ends("ative")) {
                replace_if_measured("");
            } else if (ends("alize")) {
                replace_if_measured("al");
            }
            break;
        case 'i':
            if (ends("iciti")) {
                replace_if_measured("ic");
            }
            break;
        case 'l':
            if (ends("ical")) {
                replace_if_measured("ic");
            } else if (ends("ful")) {
                replace_if_measured("");
            }
            break;
        case 's':
            if (ends("ness")) {
                replace_if_measured("");
            }
            break;
        default: break;
        }
    }

    void step4()
    {
        bool matched = false;
        switch (at(m_k - 1)) {
        case 'a': matched = ends("al"); break;
        case 'c': matched = ends("ance") || ends("ence"); break;
        case 'e': matched = ends("er"); break;
        case 'i': matched = ends("ic"); break;
        case 'l': matched = ends("able") || ends("ible"); break;
        case 'n': matched = ends("ant") || ends("ement") || ends("ment") || ends("ent"); break;
        case 'o':
            matched = (ends("ion") && m_j >= 0 && (at(m_j) == 's' || at(m_j) == 't')) || ends("ou");
            break;
        case 's': matched = ends("ism"); break;
        case 't': matched = ends("ate") || ends("iti"); break;
        case 'u': matched = ends("ous"); break;
        case 'v': matched = ends("ive"); break;
        case 'z': matched = ends("ize"); break;
        default: break;
        }
        if (matched && measure() > 1) {
            m_k = m_j;
            truncate();
        }
    }

    void step5()
    {
        m_j = m_k;
        if (at(m_k) == 'e') {
            int a = measure();
            if (a > 1 || (a == 1 && !cvc(m_k - 1))) {
                --m_k;
                truncate();
            }
        }
        if (at(m_k) == 'l' && double_consonant(m_k) && measure() > 1) {
            --m_k;
            truncate();
        }
    }

    std::string m_b;
    int m_k;
    int m_j = 0;
};

}  // namespace

std::string porter_stem(std::string_view word)
{
    return PorterStemmer(word).run();
}

}  // namespace facetlm
