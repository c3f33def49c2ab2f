import pytest

from genied.errors import (
    AlreadyResolved,
    EmptyTypeSet,
    NoCurrentGroup,
    UnknownSuggestion,
    UnknownType,
)
from genied.prompt import TaskDescription
from genied.session import (
    ChatMessage,
    SessionState,
    accept_suggestion,
    append_message,
    dismiss_group,
    publish_group,
    render_accepted_body,
    update_config,
)
from genied.suggestions import CANONICAL_TYPES, Suggestion, SuggestionGroup


def make_group(gid: str, n: int = 3) -> SuggestionGroup:
    return SuggestionGroup(
        id=gid,
        suggestions=tuple(
            Suggestion(
                id=f"{gid}.{i}",
                tag="improvement",
                description=f"suggestion {i} of {gid}",
                code=f"x = {i}",
                explanation=f"because {i}",
            )
            for i in range(1, n + 1)
        ),
    )


# -- messages ------------------------------------------------------------


def test_messages_append_only():
    state = SessionState()
    state = append_message(state, ChatMessage("user", "one"))
    state = append_message(state, ChatMessage("assistant", "two"))
    assert [m.body for m in state.messages] == ["one", "two"]


def test_message_role_and_origin_validated():
    with pytest.raises(ValueError):
        ChatMessage("system", "x")
    with pytest.raises(ValueError):
        ChatMessage("user", "x", origin="pasted")
    with pytest.raises(ValueError):
        ChatMessage("user", "x", origin="accepted-suggestion")
    ChatMessage("assistant", "x", origin="accepted-suggestion")  # allowed


# -- publish -------------------------------------------------------------


def test_publish_replaces_unretained_group():
    state = publish_group(SessionState(), make_group("g-1"))
    state = publish_group(state, make_group("g-2"))
    assert state.current_group.id == "g-2"
    assert state.retained_groups == ()


def test_publish_anchors_at_message_count():
    state = SessionState()
    state = append_message(state, ChatMessage("user", "one"))
    state = append_message(state, ChatMessage("user", "two"))
    state = publish_group(state, make_group("g-1"))
    assert state.current_anchor == 2


def test_publish_preserves_retained_predecessor_at_its_anchor():
    state = append_message(SessionState(), ChatMessage("user", "early"))
    state = publish_group(state, make_group("g-1"))
    state = accept_suggestion(state, "g-1.2", at=5)
    state = append_message(state, ChatMessage("user", "later"))
    state = publish_group(state, make_group("g-2"))
    assert state.current_group.id == "g-2"
    assert len(state.retained_groups) == 1
    kept = state.retained_groups[0]
    assert kept.group.id == "g-1"
    assert kept.anchor == 1  # where g-1 was published, despite later messages
    assert state.current_anchor == 3


# -- accept --------------------------------------------------------------


def test_accept_flips_state_and_appends_one_message():
    state = publish_group(SessionState(), make_group("g-1"))
    state = accept_suggestion(state, "g-1.1", at=7)
    accepted = state.current_group.get("g-1.1")
    assert accepted.state == "accepted"
    assert state.current_group.retained is True
    assert state.current_group.get("g-1.2").state == "temporary"
    assert len(state.messages) == 1
    message = state.messages[0]
    assert message.role == "assistant"
    assert message.origin == "accepted-suggestion"
    assert message.at == 7


def test_accepted_body_layout():
    s = Suggestion(id="x", tag="test", description="Add a test.",
                   code="assert f(1) == 2", explanation="Covers the happy path.")
    assert render_accepted_body(s) == (
        "Add a test.\n\n```\nassert f(1) == 2\n```\n\nCovers the happy path."
    )


def test_accepted_body_drops_empty_blocks():
    no_code = Suggestion(id="x", tag="test", description="D", explanation="E")
    assert render_accepted_body(no_code) == "D\n\nE"
    bare = Suggestion(id="x", tag="test", description="D")
    assert render_accepted_body(bare) == "D"


def test_accept_twice_rejected():
    state = publish_group(SessionState(), make_group("g-1"))
    state = accept_suggestion(state, "g-1.1")
    with pytest.raises(AlreadyResolved):
        accept_suggestion(state, "g-1.1")


def test_accept_unknown_rejected():
    state = publish_group(SessionState(), make_group("g-1"))
    with pytest.raises(UnknownSuggestion):
        accept_suggestion(state, "g-9.1")
    with pytest.raises(UnknownSuggestion):
        accept_suggestion(SessionState(), "g-1.1")


def test_accept_in_retained_group():
    state = publish_group(SessionState(), make_group("g-1"))
    state = accept_suggestion(state, "g-1.1")
    state = publish_group(state, make_group("g-2"))
    # g-1 now lives in retained_groups; its other suggestions stay acceptable
    state = accept_suggestion(state, "g-1.2")
    kept = state.retained_groups[0].group
    assert kept.get("g-1.2").state == "accepted"
    assert len(state.messages) == 2


def test_accept_dismissed_suggestion_rejected():
    state = publish_group(SessionState(), make_group("g-1"))
    state = accept_suggestion(state, "g-1.1")
    state = dismiss_group(state)  # g-1 retained; g-1.2 and g-1.3 dismissed
    with pytest.raises(AlreadyResolved):
        accept_suggestion(state, "g-1.2")


# -- dismiss -------------------------------------------------------------


def test_dismiss_without_accept_discards_group():
    state = publish_group(SessionState(), make_group("g-1"))
    state = dismiss_group(state)
    assert state.current_group is None
    assert state.retained_groups == ()


def test_dismiss_marks_temporaries_dismissed_and_keeps_accepted():
    state = publish_group(SessionState(), make_group("g-1"))
    state = accept_suggestion(state, "g-1.2")
    state = dismiss_group(state)
    assert state.current_group is None
    kept = state.retained_groups[0].group
    assert kept.get("g-1.1").state == "dismissed"
    assert kept.get("g-1.2").state == "accepted"
    assert kept.get("g-1.3").state == "dismissed"


def test_dismiss_with_no_group_rejected():
    with pytest.raises(NoCurrentGroup):
        dismiss_group(SessionState())
    state = publish_group(SessionState(), make_group("g-1"))
    state = dismiss_group(state)
    with pytest.raises(NoCurrentGroup):
        dismiss_group(state)


# -- config --------------------------------------------------------------


def test_update_config_partial():
    state = SessionState()
    state = update_config(state, task=TaskDescription("ship it"))
    assert state.config.task.text == "ship it"
    assert state.config.enabled == frozenset(CANONICAL_TYPES)
    state = update_config(state, enabled=frozenset({"Debugging", "Testing"}))
    assert state.config.enabled == frozenset({"bug-fix", "test"})
    assert state.config.task.text == "ship it"  # untouched
    state = update_config(state, model="codestral")
    assert state.config.model == "codestral"
    assert state.config.enabled == frozenset({"bug-fix", "test"})


def test_update_config_rejects_empty_type_set():
    with pytest.raises(EmptyTypeSet):
        update_config(SessionState(), enabled=frozenset())


def test_update_config_rejects_unknown_type():
    with pytest.raises(UnknownType):
        update_config(SessionState(), enabled=frozenset({"refactoring"}))
