import pytest

from cfexplain import parse_diff, tokenize

# A php-flavoured diff: a helper that used to return a storage handle now
# stores content and returns a UI element. Exercises context/added/deleted
# lines, ::/-> operators, $-identifiers, and repeated identifiers.
STORAGE_DIALOG_DIFF = """\
private async function storeAndDisplayDialog(
SomeContext $vc,
SomeContent $content,
-   ): Awaitable<SomethingStoreHandle> {
+   ): Awaitable<SomeUIElement> {
-    $store_handle = await SomethingStore::genStoreHandle($vc);
+    $store_handle = await SomethingStore::genHandle($vc);
+    ... other code ...
+    $store_success = await $store_handle->store(
+      $store_handle,
+      $content,
+    );
-    return $store_handle;
+    return await $store_success->genUIElementToRender();
}
"""


@pytest.fixture(scope="session")
def storage_diff():
    return parse_diff(STORAGE_DIALOG_DIFF, "storage_dialog")


@pytest.fixture(scope="session")
def storage_program(storage_diff):
    return tokenize(storage_diff)


def program_of(text: str, name: str = "<test>"):
    return tokenize(parse_diff(text, name))


def group_by_text(program, text: str):
    matches = [g for g in program.groups if g.canonical_text == text]
    assert len(matches) == 1, f"expected one group for {text!r}, got {matches}"
    return matches[0]
