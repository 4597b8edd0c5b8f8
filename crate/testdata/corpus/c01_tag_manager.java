class TagManager {
    private List<Tag> mTags;
    private int mCount;

    public void addTag(Tag tag) {
        if (tag == null) {
            mCount = mCount - 1;
            return;
        }
        // <start>
        list.add(tag);
        int total = list.size();
        // <end>
    }
}
