class CommentListFragment {
    private ListView listView;
    private int mCommentListPosition;
    private Adapter mAdapter;

    private void resetScroll() {
        listView.setSelection(0);
    }

    public void showComments(Adapter adapter) {
        if (adapter == null) {
            return;
        }
        mAdapter = adapter;
        // <start>
        list.clearChoices();
        list.setAdapter(adapter);
        list.setSelection(target);
        list.smoothScrollToPosition(target);
        int first = list.getFirstVisiblePosition();
        int visible = list.getChildCount();
        // <end>
    }
}
